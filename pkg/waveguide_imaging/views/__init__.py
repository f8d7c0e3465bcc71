"""Views package: plain-text tables for the command line."""

from .tables import checks_table, format_table, modes_table, report_table, violations_text

__all__ = ['checks_table', 'format_table', 'modes_table', 'report_table', 'violations_text']
