"""Convert the npm ``quran-json`` package (v3.1.2) into the bundled corpus files.

Usage::

    npm pack quran-json@3.1.2 && tar xzf quran-json-3.1.2.tgz
    python scripts/prepare_quran_corpus.py package/dist src/deenkit/data

Writes ``quran_verses.tsv.gz`` (surah, ayah, Uthmani text, English translation)
and ``surahs.tsv`` (number, Arabic name, transliteration, meaning, revelation,
verse count). The Uthmani text is from the King Fahd Complex edition via
quranenc.com, the translation is Saheeh International; both CC BY-SA 4.0 as
redistributed by quran-json.
"""

import gzip
import json
import sys
from pathlib import Path


def main(src: str, dst: str) -> None:
    chapters = json.loads((Path(src) / "quran_en.json").read_text(encoding="utf-8"))
    out = Path(dst)
    # mtime=0 keeps the gzip bytes (and therefore the pinned hash) reproducible
    with open(out / "quran_verses.tsv.gz", "wb") as raw:
        with gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as gz:
            for ch in chapters:
                for v in ch["verses"]:
                    line = f"{ch['id']}\t{v['id']}\t{v['text']}\t{v['translation']}\n"
                    gz.write(line.encode("utf-8"))
    with open(out / "surahs.tsv", "w", encoding="utf-8") as fh:
        fh.write("number\tname_ar\tname_en\tmeaning\trevelation\tverses\n")
        for ch in chapters:
            rev = "Meccan" if ch["type"] == "meccan" else "Medinan"
            fh.write(
                f"{ch['id']}\t{ch['name']}\t{ch['transliteration']}\t"
                f"{ch['translation']}\t{rev}\t{ch['total_verses']}\n"
            )


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
