#!/usr/bin/env python3
"""Pin reference AIS decodes for tests/data/ais_corpus.nmea.

Runs pyais (an independent, published decoder) over the corpus and writes
tests/data/ais_reference.json. Regenerate only when the corpus changes:

    pip install pyais==3.3.1
    python3 tests/oracles/ais_reference.py
"""
import json
import pathlib

from pyais import decode
from pyais.messages import NMEAMessage

KNOT_MPS = 1852.0 / 3600.0
here = pathlib.Path(__file__).resolve().parent
corpus = here.parent / "data" / "ais_corpus.nmea"
out = here.parent / "data" / "ais_reference.json"

entries = []
pending = []
for raw in corpus.read_text().splitlines():
    line = raw.strip().encode()
    if not line:
        continue
    sentence = NMEAMessage(line)
    assert sentence.is_valid, f"bad checksum: {raw}"
    pending.append(raw.strip())
    if sentence.is_multi and len(pending) < int(sentence.frag_cnt):
        continue
    msg = decode(*[p.encode() for p in pending]).asdict()
    e = {"sentences": pending, "type": msg["msg_type"], "mmsi": msg["mmsi"]}
    if msg["msg_type"] in (1, 2, 3, 18):
        e["lat"] = msg["lat"]
        e["lon"] = msg["lon"]
        e["sog_mps"] = msg["speed"] * KNOT_MPS
        e["cog_deg"] = msg["course"]
        e["heading"] = msg["heading"]
    elif msg["msg_type"] == 5:
        e["name"] = msg["shipname"]
        e["length_m"] = msg["to_bow"] + msg["to_stern"]
        e["beam_m"] = msg["to_port"] + msg["to_starboard"]
    entries.append(e)
    pending = []

out.write_text(json.dumps(entries, indent=2) + "\n")
print(f"wrote {len(entries)} entries to {out}")
