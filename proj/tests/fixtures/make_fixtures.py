#!/usr/bin/env python3
"""Regenerates the committed binary fixtures and their ground-truth dumps.

The SQLite files and plists are produced by independent, well-tested
libraries; the *.dump.tsv / *.expected.json files they emit are the oracle
side for the reader tests. Run from this directory:

    python3 make_fixtures.py
"""

import datetime
import json
import os
import plistlib
import sqlite3

HERE = os.path.dirname(os.path.abspath(__file__))


def display(value):
    if value is None:
        return "NULL"
    if isinstance(value, bytes):
        return "x'" + value.hex() + "'"
    return str(value)


def dump_db(path, out_path):
    con = sqlite3.connect(path)
    lines = []
    tables = [
        row[0]
        for row in con.execute(
            "SELECT name FROM sqlite_master WHERE type='table' ORDER BY name"
        )
    ]
    for table in tables:
        cols = [r[1] for r in con.execute(f"PRAGMA table_info({table})")]
        for row in con.execute(f"SELECT * FROM {table} ORDER BY rowid"):
            cells = "\t".join(f"{c}={display(v)}" for c, v in zip(cols, row))
            lines.append(f"{table}\t{cells}")
    con.close()
    with open(out_path, "w") as f:
        f.write("\n".join(lines) + "\n")


def make_u1_db():
    path = os.path.join(HERE, "u1.db")
    if os.path.exists(path):
        os.unlink(path)
    con = sqlite3.connect(path)
    con.execute(
        "CREATE TABLE login_info_table (id INTEGER PRIMARY KEY, consumer_key TEXT,"
        " consumer_secret TEXT, token TEXT, token_secret TEXT)"
    )
    con.execute(
        "INSERT INTO login_info_table VALUES (1, 'mHrBm4w',"
        " 'wYFYcQSIIdFyMSNGfEeQmUSEWUEP',"
        " 'kdEYALSLiecsKwMulBrYJcpNIDswSfzZHYvPQvNvFfPdnDRkf',"
        " 'ERYAtMidazPTMHylkFYnbooQJmsrAsmlTmPeQhBknkQRlaLCFx')"
    )
    con.execute(
        "CREATE TABLE nodes_table (parent_path TEXT, type INTEGER, path TEXT,"
        " content_path TEXT, name TEXT, is_public INTEGER, public_url TEXT,"
        " size INTEGER, last_modified TEXT, hash TEXT)"
    )
    rows = [
        ("/", 1, "/~/Ubuntu One", "/content/~/Ubuntu One", "Ubuntu One", 0, None, -1,
         None, None),
        ("/~/Ubuntu One", 2, "/~/Ubuntu One/AQUA-OS2.BMP",
         "/content/~/Ubuntu One/AQUA-OS2.BMP", "AQUA-OS2.BMP", 0, None, 153674,
         "2014-05-29T03:12:40Z", "sha1:93e062217349ac1bc3584eee01e2d8305b435e40"),
        ("/~/Ubuntu One", 2, "/~/Ubuntu One/HANGING.DOC",
         "/content/~/Ubuntu One/HANGING.DOC", "HANGING.DOC", 0, None, 22016,
         "2014-05-29T03:12:41Z", "sha1:706504f2f6e9dcd1571ac0cfdfd13a9b4684eea9"),
        ("/~/Ubuntu One", 2, "/~/Ubuntu One/HANGING.txt",
         "/content/~/Ubuntu One/HANGING.txt", "HANGING.txt", 0, None, 2019,
         "2014-05-29T03:12:42Z", "sha1:6a1583fe216e4ccc9a1546d0b7bd047fea95c7bb"),
    ]
    con.executemany("INSERT INTO nodes_table VALUES (?,?,?,?,?,?,?,?,?,?)", rows)
    con.execute("CREATE TABLE version_table (id INTEGER PRIMARY KEY, version TEXT)")
    con.execute("INSERT INTO version_table VALUES (1, '0.5')")
    con.commit()
    con.close()
    dump_db(path, os.path.join(HERE, "u1.db.dump.tsv"))


def make_overflow_db():
    path = os.path.join(HERE, "overflow.db")
    if os.path.exists(path):
        os.unlink(path)
    con = sqlite3.connect(path)
    con.execute("PRAGMA page_size=512")
    con.execute(
        "CREATE TABLE overflow_table (id INTEGER PRIMARY KEY, note TEXT, blobby BLOB,"
        " num INTEGER)"
    )
    long_text = "".join(chr(ord("a") + (i * 7) % 26) for i in range(9000))
    con.execute(
        "INSERT INTO overflow_table VALUES (1, ?, ?, ?)",
        (long_text, bytes(range(256)) * 6, -123456789012345),
    )
    con.execute("INSERT INTO overflow_table VALUES (2, 'short', x'00ff10', 42)")
    con.execute("INSERT INTO overflow_table VALUES (3, NULL, NULL, NULL)")
    for i in range(4, 160):
        con.execute("INSERT INTO overflow_table VALUES (?, ?, NULL, ?)",
                    (i, f"row-{i}", i * i))
    con.commit()
    con.close()
    dump_db(path, os.path.join(HERE, "overflow.db.dump.tsv"))


def make_wal_db():
    path = os.path.join(HERE, "wal.db")
    for suffix in ("", "-wal", "-shm"):
        if os.path.exists(path + suffix):
            os.unlink(path + suffix)
    con = sqlite3.connect(path)
    con.execute("PRAGMA journal_mode=WAL")
    con.execute("CREATE TABLE version_table (id INTEGER PRIMARY KEY, version TEXT)")
    con.execute("INSERT INTO version_table VALUES (1, '0.5')")
    con.commit()
    con.close()
    for suffix in ("-wal", "-shm"):
        if os.path.exists(path + suffix):
            os.unlink(path + suffix)


def make_plists():
    purchase = datetime.datetime(2014, 5, 10, 3, 18, 33)
    top = {
        "appleId": "buyer@example.com",
        "artistName": "Canonical Fan Works",
        "bundleShortVersionString": "0.5",
        "itemName": "U1Files",
        "purchaseDate": purchase,
        "softwareVersionBundleId": "com.example.u1files",
    }
    with open(os.path.join(HERE, "itunes_metadata.plist"), "wb") as f:
        plistlib.dump(top, f, fmt=plistlib.FMT_XML)

    nested = {
        "itemName": "U1Files",
        "com.apple.iTunesStore.downloadInfo": {
            "accountInfo": {"appleId": "buyer@example.com"},
            "purchaseDate": purchase,
        },
    }
    with open(os.path.join(HERE, "itunes_metadata_binary.plist"), "wb") as f:
        plistlib.dump(nested, f, fmt=plistlib.FMT_BINARY)

    with open(os.path.join(HERE, "itunes_metadata_binary.plist"), "rb") as f:
        whole = f.read()
    with open(os.path.join(HERE, "itunes_truncated.plist"), "wb") as f:
        f.write(whole[: len(whole) // 2])

    expected = {
        "appleId": "buyer@example.com",
        "purchaseDate": "2014-05-10T03:18:33Z",
    }
    with open(os.path.join(HERE, "itunes_expected.json"), "w") as f:
        json.dump(expected, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    make_u1_db()
    make_overflow_db()
    make_wal_db()
    make_plists()
    print("fixtures written to", HERE)
