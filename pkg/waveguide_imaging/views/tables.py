"""Fixed-width text tables printed by the command line."""

from typing import Any, Dict, Iterable, List, Sequence

from ..models import ModeEntry


def format_table(headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Left-aligned columns separated by two spaces, with a dashed rule under the header."""
    cells: List[List[str]] = [[str(h) for h in headers]]
    cells += [[_cell(v) for v in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, complex):
        return f"{value.real:.6g}{value.imag:+.6g}j" if value.imag else f"{value.real:.6g}"
    return str(value)


def modes_table(entries: Sequence[ModeEntry], lattice_count: int, limit: int = 0) -> str:
    """Mode index pairs with eigenvalue and axial wavenumber; ``limit`` 0 shows all."""
    shown = entries if limit <= 0 else entries[:limit]
    body = format_table(
        ("#", "n1", "n2", "lambda_n", "beta_n", "mult"),
        ((i + 1, e.n1, e.n2, e.eigenvalue, e.beta, e.multiplicity) for i, e in enumerate(shown)),
    )
    footer = f"{len(entries)} propagating modes, {lattice_count} index pairs counted"
    if len(shown) < len(entries):
        footer += f" (first {len(shown)} shown)"
    return f"{body}\n{footer}"


def checks_table(results: Sequence[Any]) -> str:
    """Property-check results: name, value, tolerance, PASS/FAIL, detail."""
    body = format_table(
        ("check", "value", "tolerance", "status", "detail"),
        ((r.name, f"{r.value:.3e}", f"{r.tolerance:.1e}", "PASS" if r.passed else "FAIL", r.detail)
         for r in results),
    )
    failed = sum(not r.passed for r in results)
    return f"{body}\n{len(results) - failed}/{len(results)} checks passed"


def report_table(report: Dict[str, Any]) -> str:
    return format_table(("field", "value"), sorted(report.items()))


def violations_text(violations: Sequence[str]) -> str:
    return "\n".join(f"  - {v}" for v in violations)
