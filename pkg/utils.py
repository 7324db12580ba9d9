# Utility functions for the latwave command-line laboratory
import csv
import hashlib
import json
import logging
import os
import re
import sys
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence

from errors import ValidationError

# Initialize colorama for cross-platform colored output
try:
    from colorama import init, Fore, Style
    init()

    def format_heading(text: str) -> str:
        """Format a section heading with yellow color."""
        return f"{Fore.YELLOW}{text}{Style.RESET_ALL}"

    def format_value(text: str) -> str:
        """Format a numeric result with cyan color."""
        return f"{Fore.CYAN}{text}{Style.RESET_ALL}"

    def format_success(text: str) -> str:
        """Format output paths and confirmations with green color."""
        return f"{Fore.GREEN}{text}{Style.RESET_ALL}"

    def format_error(error: str) -> str:
        """Format error text with red color."""
        return f"{Fore.RED}{error}{Style.RESET_ALL}"

    _LEVEL_STYLES = {
        logging.DEBUG: Style.DIM,
        logging.INFO: Fore.CYAN,
        logging.WARNING: Fore.YELLOW,
        logging.ERROR: Fore.RED,
        logging.CRITICAL: Fore.RED + Style.BRIGHT,
    }
    _RESET = Style.RESET_ALL

except ImportError:
    # If colorama is not available, provide simple fallback functions
    def format_heading(text: str) -> str:
        return text

    def format_value(text: str) -> str:
        return text

    def format_success(text: str) -> str:
        return text

    def format_error(error: str) -> str:
        return error

    _LEVEL_STYLES = {}
    _RESET = ""


class ColorFormatter(logging.Formatter):
    """Colours each record by level when colorama is present."""

    def format(self, record: logging.LogRecord) -> str:
        text = super().format(record)
        style = _LEVEL_STYLES.get(record.levelno, "")
        return f"{style}{text}{_RESET}" if style else text


def configure_logging(verbosity: int = 0) -> None:
    """verbosity > 0 selects DEBUG, < 0 selects WARNING, 0 selects INFO."""
    level = logging.DEBUG if verbosity > 0 else logging.WARNING if verbosity < 0 else logging.INFO
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(ColorFormatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger()
    for old in list(root.handlers):
        root.removeHandler(old)
    root.addHandler(handler)
    root.setLevel(level)


def format_number(x) -> str:
    """17 significant digits, enough for a lossless double round-trip."""
    return format(float(x), ".17g")


def write_csv(path: str, rows: Iterable[Sequence]) -> str:
    with open(path, "w", newline="", encoding="utf-8") as f:
        csv.writer(f).writerows(rows)
    return path


def write_json(path: str, payload) -> str:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


_CONFIG_LINE = re.compile(r'^\s*([A-Za-z][A-Za-z0-9_\-]*)\s*=\s*(.*?)\s*$')


def parse_config_text(text_content: str) -> Dict[str, str]:
    """
    Parse `key = value` lines; `#` starts a comment and dashes in keys become underscores.
    """
    parsed = {}
    for number, line in enumerate(text_content.split('\n'), start=1):
        line = line.split('#', 1)[0]
        if not line.strip():
            continue
        match = _CONFIG_LINE.match(line)
        if not match:
            raise ValidationError(f"malformed config line {number}: {line.strip()!r}")
        parsed[match.group(1).replace('-', '_')] = match.group(2)
    return parsed


def load_config(path: str) -> Dict[str, str]:
    if not os.path.exists(path):
        raise ValidationError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as f:
        return parse_config_text(f.read())


def parse_int_list(text: str) -> List[int]:
    """Parse comma-separated integers, e.g. '3,4' or '-1, 2'."""
    try:
        return [int(item.strip()) for item in text.split(',') if item.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from None


def parse_float_list(text: str) -> List[float]:
    try:
        return [float(item.strip()) for item in text.split(',') if item.strip()]
    except ValueError:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}") from None


def parse_fraction_list(text: str) -> List[Fraction]:
    """Parse comma-separated rationals such as '1/3,1/3,1/3'."""
    try:
        return [Fraction(item.strip()) for item in text.split(',') if item.strip()]
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"expected comma-separated rationals, got {text!r}") from None


def parse_monomials(text: str) -> List[tuple]:
    """Parse exponent tuples separated by ';', e.g. '2,2' or '4,0;0,4;2,2'."""
    tuples = [tuple(parse_int_list(group)) for group in text.split(';') if group.strip()]
    if not tuples:
        raise ValidationError("no monomials given")
    if len({len(t) for t in tuples}) != 1:
        raise ValidationError(f"exponent tuples must share one length: {text!r}")
    if any(e < 0 for t in tuples for e in t):
        raise ValidationError("exponents must be nonnegative")
    return tuples
