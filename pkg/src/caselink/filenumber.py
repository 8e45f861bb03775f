"""Police file numbers of the shape CC####-######-YY/C.

CC is a two-letter county code, #### the station id, ###### the running
sequence number, YY the two-digit year, C a single check digit. Leading
zeros are significant, so every segment stays a string. The check digit
scheme is not published; it is carried through verbatim, never verified.
"""

from __future__ import annotations

from dataclasses import dataclass


class FileNumberError(ValueError):
    pass


@dataclass(frozen=True)
class FileNumber:
    county: str
    station: str
    sequence: str
    year: str
    check: str

    def __str__(self) -> str:
        return f"{self.county}{self.station}-{self.sequence}-{self.year}/{self.check}"


def parse_file_number(text: str) -> FileNumber:
    """Parse a file number, raising FileNumberError naming the bad segment."""
    parts = text.split("-")
    if len(parts) != 3:
        raise FileNumberError(f"expected two '-' separators in {text!r}")
    head, sequence, tail = parts
    year, sep, check = tail.partition("/")
    if not sep:
        raise FileNumberError(f"missing '/' before check digit in {text!r}")
    county, station = head[:2], head[2:]
    if len(county) != 2 or not ("A" <= county[0] <= "Z" and "A" <= county[1] <= "Z"):
        raise FileNumberError(f"county code must be two uppercase letters in {text!r}")
    if len(station) != 4 or not station.isdigit():
        raise FileNumberError(f"station id must be four digits in {text!r}")
    if len(sequence) != 6 or not sequence.isdigit():
        raise FileNumberError(f"sequence must be six digits in {text!r}")
    if len(year) != 2 or not year.isdigit():
        raise FileNumberError(f"year must be two digits in {text!r}")
    if len(check) != 1 or not check.isdigit():
        raise FileNumberError(f"check digit must be one digit in {text!r}")
    return FileNumber(county, station, sequence, year, check)


def is_file_number(text: str) -> bool:
    try:
        parse_file_number(text)
    except FileNumberError:
        return False
    return True
