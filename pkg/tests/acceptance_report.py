"""Collects one line per acceptance criterion for the end-of-run summary."""

RESULTS: dict[int, tuple[bool, str, str]] = {}


def record(number: int, title: str, ok: bool, detail: str) -> None:
    RESULTS[number] = (ok, title, detail)
    print(format_line(number))


def format_line(number: int) -> str:
    ok, title, detail = RESULTS[number]
    return f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} ({detail})"


def lines() -> list[str]:
    return [format_line(k) for k in sorted(RESULTS)]
