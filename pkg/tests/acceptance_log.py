"""Shared store for the one-line acceptance verdicts printed at session end."""

LINES: list[str] = []


def record(number: int, ok: bool, detail: str, elapsed: float, limit: float) -> str:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s / {limit:.0f}s) {detail}"
    LINES.append(line)
    print(line)
    return line
