#!/usr/bin/env python3
"""Brute-force reference answers for the mini-DISCOS fixture.

Reads mini_discos.json and gold.jsonl and writes oracle.json. Everything here
is computed by linear scans over the raw JSON so it shares no code path with
the Rust engine. Re-run after editing the fixture:

    python3 oracle.py > oracle.json
"""
import json
import math
import os
import re
from datetime import date
from decimal import Decimal

HERE = os.path.dirname(os.path.abspath(__file__))

with open(os.path.join(HERE, "mini_discos.json")) as f:
    KB = json.load(f)
with open(os.path.join(HERE, "gold.jsonl")) as f:
    GOLD = [json.loads(line) for line in f if line.strip()]

ENTS = {e["id"]: e for e in KB["entities"]}
CONCEPTS = {c["id"]: c for c in KB["concepts"]}
CONCEPT_BY_NAME = {c["name"]: c["id"] for c in KB["concepts"]}


def ancestors(cid):
    # walk subclassOf edges until nothing new appears
    seen = {cid}
    changed = True
    while changed:
        changed = False
        for c in list(seen):
            for sup in CONCEPTS[c]["subclassOf"]:
                if sup not in seen:
                    seen.add(sup)
                    changed = True
    return seen


def members(concept_name):
    target = CONCEPT_BY_NAME[concept_name]
    out = []
    for eid, e in ENTS.items():
        if any(target in ancestors(c) for c in e["instanceOf"]):
            out.append(eid)
    return sorted(out)


def value_of(v):
    t = v["type"]
    if t == "quantity":
        return ("quantity", Decimal(str(v["value"])), v.get("unit"))
    if t == "date":
        return ("date", date.fromisoformat(v["value"]), None)
    if t == "year":
        return ("year", int(v["value"]), None)
    return ("string", v["value"], None)


def attr_values(eid, key):
    return [value_of(a["value"]) for a in ENTS[eid]["attributes"] if a["key"] == key]


def cmp(a, op, b):
    return {"<": a < b, ">": a > b, "=": a == b}[op]


def find(name):
    exact = sorted(eid for eid, e in ENTS.items() if e["name"] == name or name in e["aliases"])
    if exact or not name:
        return exact
    low = name.lower()
    return sorted(eid for eid, e in ENTS.items()
                  if e["name"].lower() == low or any(a.lower() == low for a in e["aliases"]))


def render_value(v):
    kind, val, unit = v
    if kind == "quantity":
        return f"{val} {unit}" if unit else f"{val}"
    if kind == "date":
        return val.isoformat()
    return str(val)


def run(program):
    res = []
    for call in program:
        fn, inp = call["function"], call["inputs"]
        deps = [res[d] for d in call["dependencies"]]
        src = deps[0][1] if deps else None
        if fn == "FindAll":
            out = ("ents", sorted(ENTS))
        elif fn == "Find":
            out = ("ents", find(inp[0]))
        elif fn == "FilterConcept":
            m = set(members(inp[0]))
            out = ("ents", [e for e in src if e in m])
        elif fn == "FilterStr":
            out = ("ents", [e for e in src if any(v[1] == inp[1] for v in attr_values(e, inp[0]))])
        elif fn == "FilterNum":
            lit = Decimal(inp[1])
            out = ("ents", [e for e in src if any(v[0] == "quantity" and cmp(v[1], inp[2], lit) for v in attr_values(e, inp[0]))])
        elif fn == "FilterDate":
            lit = date.fromisoformat(inp[1])
            out = ("ents", [e for e in src if any(v[0] == "date" and cmp(v[1], inp[2], lit) for v in attr_values(e, inp[0]))])
        elif fn == "FilterYear":
            lit = int(inp[1])
            def year(v):
                return v[1].year if v[0] == "date" else v[1]
            out = ("ents", [e for e in src if any(cmp(year(v), inp[2], lit) for v in attr_values(e, inp[0]))])
        elif fn == "Relate":
            direction = inp[1] if len(inp) > 1 else "forward"
            objs = set()
            for e in src:
                for r in ENTS[e]["relations"]:
                    if r["predicate"] == inp[0] and r["direction"] == direction:
                        objs.add(r["object"])
            out = ("ents", sorted(objs))
        elif fn == "QueryAttr":
            vals = []
            for e in src:
                vals.extend(attr_values(e, inp[0]))
            out = ("vals", vals)
        elif fn in ("What", "QueryName"):
            out = ("names", [ENTS[e]["name"] for e in src])
        elif fn == "Count":
            out = ("count", len(src))
        elif fn == "And":
            out = ("ents", sorted(set(deps[0][1]) & set(deps[1][1])))
        elif fn == "Or":
            out = ("ents", sorted(set(deps[0][1]) | set(deps[1][1])))
        elif fn == "SelectAmong":
            scored = []
            for e in src:
                vs = [v[1] for v in attr_values(e, inp[0])]
                if vs:
                    scored.append((max(vs) if inp[1] == "largest" else min(vs), e))
            best = max(s for s, _ in scored) if inp[1] == "largest" else min(s for s, _ in scored)
            out = ("ents", sorted(e for s, e in scored if s == best))
        elif fn == "SelectBetween":
            a, b = deps[0][1][0], deps[1][1][0]
            va, vb = max(v[1] for v in attr_values(a, inp[0])), max(v[1] for v in attr_values(b, inp[0]))
            if va == vb:
                pick = sorted({a, b})
            elif (va > vb) == (inp[1] == "greater"):
                pick = [a]
            else:
                pick = [b]
            out = ("ents", pick)
        elif fn == "QueryRelation":
            a, b = deps[0][1][0], deps[1][1][0]
            out = ("names", sorted({r["predicate"] for r in ENTS[a]["relations"] if r["object"] == b}))
        elif fn == "VerifyStr":
            out = ("bool", all(v[1] == inp[0] for v in src))
        elif fn == "VerifyNum":
            out = ("bool", all(cmp(v[1], inp[1], Decimal(inp[0])) for v in src))
        elif fn == "VerifyDate":
            out = ("bool", all(cmp(v[1], inp[1], date.fromisoformat(inp[0])) for v in src))
        elif fn == "VerifyYear":
            out = ("bool", all(cmp(v[1].year if v[0] == "date" else v[1], inp[1], int(inp[0])) for v in src))
        else:
            raise ValueError(fn)
        res.append(out)
    return res[-1]


def render(result):
    tag, val = result
    if tag == "count":
        return str(val)
    if tag == "bool":
        return "yes" if val else "no"
    if tag == "ents":
        items = [ENTS[e]["name"] for e in val]
    elif tag == "vals":
        items = [render_value(v) for v in val]
    else:
        items = val
    return ", ".join(items) if items else "no result"


def trigram_profile(text):
    norm = " ".join(re.sub(r"[^0-9a-z]", " ", text.lower()).split())
    padded = f" {norm} "
    prof = {}
    for i in range(len(padded) - 2):
        tri = padded[i:i + 3]
        prof[tri] = prof.get(tri, 0) + 1
    return prof


def cosine(a, b):
    pa, pb = trigram_profile(a), trigram_profile(b)
    dot = sum(v * pb.get(k, 0) for k, v in pa.items())
    na = math.sqrt(sum(v * v for v in pa.values()))
    nb = math.sqrt(sum(v * v for v in pb.values()))
    return dot / (na * nb) if na and nb else 0.0


def softmax(xs):
    m = max(xs)
    ex = [math.exp(x - m) for x in xs]
    s = sum(ex)
    return [e / s for e in ex]


relations = sorted({r["predicate"] for e in ENTS.values() for r in e["relations"]})
attr_kinds = {}
for e in ENTS.values():
    for a in e["attributes"]:
        attr_kinds.setdefault(a["key"], set()).add(a["value"]["type"])

debris_template = GOLD[1]["question"]
inclination_template = GOLD[0]["question"]
probe = "How many rocket bodies re-entered before 2010?"

out = {
    "manifest": {
        "entities": len(ENTS),
        "relations": len(relations),
        "concepts": len(CONCEPTS),
        "attribute_keys": len(attr_kinds),
        "relation_labels": relations,
        "attribute_kinds": {k: sorted(v)[0] for k, v in sorted(attr_kinds.items())},
    },
    "membership": {c["name"]: members(c["name"]) for c in KB["concepts"]},
    "answers": [render(run(g["program"])) for g in GOLD],
    "rocket_debris_total": len(members("RocketDebris")),
    "launches_on_2022_04_08": len([e for e in members("Launch")
                                   if any(v[1] == date(2022, 4, 8) for v in attr_values(e, "epoch"))]),
    "softmax_2_1_0": softmax([2.0, 1.0, 0.0]),
    "sketch_probe": {
        "question": probe,
        "similarity_to_inclination_question": cosine(probe, inclination_template),
        "similarity_to_debris_question": cosine(probe, debris_template),
    },
}
print(json.dumps(out, indent=1))
