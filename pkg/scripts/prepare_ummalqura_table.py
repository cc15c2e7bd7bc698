"""Regenerate ``ummalqura.csv`` from the month-start table shipped in ``hijridate``.

Usage::

    pip install hijridate==2.6.0
    python scripts/prepare_ummalqura_table.py src/deenkit/data/ummalqura.csv

The output lists, per Hijri year, the Gregorian date of 1 Muharram and the twelve
month lengths. The runtime converter reads only this file.
"""

import datetime as dt
import sys

from hijridate import ummalqura

# reduced Julian day 0 falls on this civil date (JDN 2400000)
RJD_EPOCH = dt.date(1858, 11, 16)


def main(path: str) -> None:
    starts = ummalqura.MONTH_STARTS
    first_year = ummalqura.HIJRI_RANGE[0][0]
    last_year = ummalqura.HIJRI_RANGE[1][0]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("hijri_year,muharram_1,month_lengths\n")
        for i, year in enumerate(range(first_year, last_year + 1)):
            block = starts[i * 12 : i * 12 + 13]
            lengths = [block[k + 1] - block[k] for k in range(12)]
            start = RJD_EPOCH + dt.timedelta(days=block[0])
            fh.write(f"{year},{start.isoformat()},{' '.join(map(str, lengths))}\n")


if __name__ == "__main__":
    main(sys.argv[1])
