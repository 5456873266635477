"""Collects one PASS/FAIL line per acceptance criterion."""

REPORT: list[str] = []


def record(criterion: str, ok: bool, detail: str, seconds: float) -> bool:
    line = f"{'PASS' if ok else 'FAIL'}  {criterion:<4} {detail} [{seconds:.1f} s]"
    REPORT.append(line)
    print(line)
    return ok
