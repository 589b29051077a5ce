#!/usr/bin/env python3
"""Builds verbatim.jsonl: 50 questions over the mini-DISCOS fixture whose
template phrasing and argument surface forms appear word for word, each with
its gold program and a hand-written paraphrase that keeps the entity names.

    python3 verbatim.py > verbatim.jsonl
"""
import json


def call(f, inputs=(), deps=()):
    return {"function": f, "inputs": list(inputs), "dependencies": list(deps)}


def query_attr(e, attr):
    return [call("Find", [e]), call("QueryAttr", [attr], [0])]


ROWS = []


def add(question, paraphrase, program):
    ROWS.append({"question": question, "paraphrase": paraphrase, "program": program})


for e in ["Saturn V", "Ariane 5", "Falcon 9", "Long March 2F", "H-IIA",
          "Hubble", "Envisat", "Skylab", "Gaofen-3", "Tianzhou 4"]:
    add(f"What is the mass of {e}?", f"Tell me the mass of {e}.", query_attr(e, "mass"))

for e in ["Saturn V", "Ariane 5", "Soyuz-FG", "PSLV-QL"]:
    add(f"What is the height of {e}?", f"How tall is {e}, what height?", query_attr(e, "height"))

for e in ["Ariane 5", "Long March 2F", "H-IIA"]:
    add(f"What is the maiden flight of {e}?", f"When was the maiden flight of {e}?",
        query_attr(e, "maiden_flight"))

for e in ["Hubble", "Envisat", "Gaofen-3", "Oceansat-3", "Skylab"]:
    add(f"Who is the operator of {e}?", f"Which organisation is the operator of {e}?",
        [call("Find", [e]), call("Relate", ["operator"], [0]), call("What", [], [1])])

for e in ["AS-506", "VA256", "PSLV-C52", "L-186"]:
    add(f"Which launch vehicle was used for {e}?", f"For {e}, which launch vehicle was used?",
        [call("Find", [e]), call("Relate", ["vehicle"], [0]), call("What", [], [1])])

for e in ["Hubble", "Envisat", "Gaofen-3", "Oceansat-3"]:
    add(f"What is the inclination of the orbit of {e}?", f"Give the inclination of the orbit of {e}.",
        [call("Find", [e]), call("Relate", ["orbit"], [0]), call("QueryAttr", ["inclination"], [1])])

for e, n in [("Envisat", "5000"), ("Skylab", "80000"), ("Gaofen-3", "3000")]:
    add(f"Is the mass of {e} more than {n} kg?", f"Does {e} have a mass of more than {n} kg?",
        query_attr(e, "mass") + [call("VerifyNum", [n, ">"], [1])])

for e, y in [("Tianzhou 4", "2023"), ("Titan 3C DEB", "2000"), ("Vega DEB", "2020")]:
    add(f"Did {e} re-enter before {y}?", f"Was it before {y} that {e} did re-enter?",
        query_attr(e, "reentry") + [call("VerifyYear", [y, "<"], [1])])

for e, s in [("Hubble", "in orbit"), ("Skylab", "decayed"), ("Crew Dragon Endeavour", "landed")]:
    add(f"Is the status of {e} {s}?", f"Is {e} currently having the status {s}?",
        query_attr(e, "status") + [call("VerifyStr", [s], [1])])

for org, s in [("NASA", "in orbit"), ("SpaceX", "landed")]:
    add(f"Which objects operated by {org} have the status {s}?",
        f"List the objects operated by {org} that have the status {s}.",
        [call("Find", [org]), call("Relate", ["operator", "backward"], [0]),
         call("FilterStr", ["status", s], [1]), call("What", [], [2])])

for site, y in [("Kennedy Space Center", "1985"), ("Guiana Space Centre", "2000"), ("Jiuquan", "2010")]:
    add(f"Which launches from {site} happened after {y}?",
        f"Name the launches from {site} that happened after {y}.",
        [call("Find", [site]), call("Relate", ["site", "backward"], [0]),
         call("FilterYear", ["epoch", y, ">"], [1]), call("What", [], [2])])

for concept, word, s in [("Payload", "payloads", "decayed"), ("RocketBody", "rocket bodies", "decayed")]:
    add(f"How many {word} have the status {s}?", f"Count the {word} that have the status {s}.",
        [call("FindAll"), call("FilterStr", ["status", s], [0]),
         call("FilterConcept", [concept], [1]), call("Count", [], [2])])

for a, b in [("Skylab", "Gaofen-3"), ("Saturn V", "Falcon 9")]:
    add(f"Which has the greater mass, {a} or {b}?", f"Between {a} and {b}, which has the greater mass?",
        [call("Find", [a]), call("Find", [b]), call("SelectBetween", ["mass", "greater"], [0, 1]),
         call("What", [], [2])])

for a, b in [("Envisat", "European Space Agency"), ("Ax-1", "Falcon 9")]:
    add(f"How is {a} related to {b}?", f"What is the relation between {a} and {b}?",
        [call("Find", [a]), call("Find", [b]), call("QueryRelation", [], [0, 1])])

assert len(ROWS) == 50, len(ROWS)
for r in ROWS:
    print(json.dumps(r, ensure_ascii=False))
