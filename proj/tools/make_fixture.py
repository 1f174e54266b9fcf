#!/usr/bin/env python3
# Copyright 2026 The synpop Authors
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds the demo MSOA fixture.

A hidden ground-truth population of households and their members is drawn
with a fixed seed and tabulated into census-style contingency tables. Only the
tables, schema, rules and configs are written; the ground truth itself is
discarded. Re-running reproduces the shipped files byte for byte.

    python3 tools/make_fixture.py fixtures/msoa_demo
"""

import argparse
import collections
import csv
import json
import pathlib
import random

SEED = 20231018
TARGET_PERSONS = 7000

SEX = ["m", "f"]
CHILD_BINS = ["0-4", "5-9", "10-15", "16-17"]
ADULT_BINS = ["18-24", "25-34", "35-44", "45-54", "55-64"]
ELDER_BINS = ["65-74", "75-84", "85+"]
AGE = CHILD_BINS + ADULT_BINS + ELDER_BINS
ETHNICITY = ["W1", "W2", "W3", "W4", "M1", "M2", "M3", "M4", "A1", "A2", "A3", "A4", "A5",
             "B1", "B2", "B3", "O1", "O2"]
ETHNIC_GROUP = {e: {"W": "wht", "M": "mxd", "A": "asn", "B": "blk", "O": "oth"}[e[0]]
                for e in ETHNICITY}
RELIGION = ["C", "B", "H", "J", "M", "S", "O", "N", "NS"]
QUALIFICATION = ["none", "level1", "level2", "apprenticeship", "level3", "level4", "other"]
MARITAL = ["single", "married", "separated", "divorced", "widowed"]

# composition code -> (size, household type, relative frequency)
COMPOSITIONS = {
    "1A": (1, "one_person", 16),
    "1E": (1, "one_person", 12),
    "2A": (2, "couple", 14),
    "2E": (2, "pensioner_couple", 7),
    "1A 1E": (2, "other", 2),
    "1A 1C": (2, "lone_parent", 4),
    "1A 2C": (3, "lone_parent", 4),
    "2A 1C": (3, "couple_children", 8),
    "2A 2C": (4, "couple_children", 11),
    "2A 3C": (5, "couple_children", 5),
    "3A": (3, "multi_adult", 6),
    "3A 1C": (4, "multi_adult", 3),
    "2A 1E": (3, "other", 3),
    "4A": (4, "multi_adult", 2),
}
SIZES = ["1", "2", "3", "4", "5"]
TYPES = ["one_person", "couple", "pensioner_couple", "couple_children", "lone_parent",
         "multi_adult", "other"]

ETHNICITY_WEIGHTS = [62, 2, 1, 4, 1.5, 1, 1.5, 1, 5, 4, 2, 1, 1.5, 4, 3, 0.5, 1, 2]
RELIGION_BY_GROUP = {
    "wht": [55, 1, 0, 1, 0.5, 0, 1, 35, 6.5],
    "mxd": [40, 1, 1, 0, 10, 0, 1, 37, 10],
    "asn": [8, 2, 25, 0, 45, 10, 1, 5, 4],
    "blk": [65, 0, 0, 0, 15, 0, 1, 11, 8],
    "oth": [30, 10, 2, 1, 30, 1, 5, 13, 8],
}


def pick(rng, items, weights=None):
    return rng.choices(items, weights=weights, k=1)[0]


def qualification(rng, age):
    if age in ("0-4", "5-9", "10-15"):
        return "none"
    if age == "16-17":
        return pick(rng, ["none", "level1", "level2"], [20, 40, 40])
    if age in ELDER_BINS:
        return pick(rng, QUALIFICATION, [40, 10, 12, 8, 8, 17, 5])
    return pick(rng, QUALIFICATION, [12, 12, 15, 5, 14, 38, 4])


def member_age(rng, cls):
    if cls == "C":
        return pick(rng, CHILD_BINS, [5, 5, 6, 2])
    if cls == "A":
        return pick(rng, ADULT_BINS, [11, 18, 17, 16, 13])
    return pick(rng, ELDER_BINS, [10, 6, 2])


def marital(rng, cls, in_couple):
    if cls == "C":
        return "single"
    if in_couple:
        return pick(rng, ["married", "single"], [78, 22])
    if cls == "E":
        return pick(rng, ["widowed", "divorced", "single", "married"], [60, 15, 10, 15])
    return pick(rng, MARITAL, [55, 8, 6, 25, 6])


def make_household(rng, code):
    size, htype, _ = COMPOSITIONS[code]
    classes = []
    for token in code.split():
        classes += [token[-1]] * int(token[:-1])
    ethnicity = pick(rng, ETHNICITY, ETHNICITY_WEIGHTS)
    couple = htype in ("couple", "pensioner_couple", "couple_children")
    members = []
    for i, cls in enumerate(classes):
        eth = ethnicity if rng.random() < 0.9 else pick(rng, ETHNICITY, ETHNICITY_WEIGHTS)
        age = member_age(rng, cls)
        if couple and i < 2:
            sex = SEX[i] if rng.random() < 0.97 else SEX[1 - i]
        else:
            sex = pick(rng, SEX)
        members.append({
            "sex": sex,
            "age": age,
            "ethnicity": eth,
            "religion": pick(rng, RELIGION, RELIGION_BY_GROUP[ETHNIC_GROUP[eth]]),
            "qualification": qualification(rng, age),
            "marital": marital(rng, cls, couple and i < 2),
        })
    return {"size": str(size), "type": htype, "composition": code}, members


def ground_truth(rng, target):
    codes = list(COMPOSITIONS)
    weights = [COMPOSITIONS[c][2] for c in codes]
    households, persons = [], []
    while len(persons) < target:
        remaining = target - len(persons)
        fitting = [c for c in codes if COMPOSITIONS[c][0] <= remaining]
        code = pick(rng, fitting, [COMPOSITIONS[c][2] for c in fitting])
        h, members = make_household(rng, code)
        households.append(h)
        persons += members
    assert len(persons) == target
    return households, persons


def write_table(path, axes, categories, rows):
    counts = collections.Counter(tuple(r[a] for a in axes) for r in rows)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(list(axes) + ["count"])
        # Census extracts omit empty cells.
        for key in sorted(counts, key=lambda k: [categories[a].index(v) for a, v in zip(axes, k)]):
            w.writerow(list(key) + [counts[key]])


def schema():
    age_grouping = {b: "ch" for b in CHILD_BINS}
    age_grouping.update({b: "ad" for b in ADULT_BINS})
    age_grouping.update({b: "el" for b in ELDER_BINS})
    return {
        "persons": {"attributes": [
            {"name": "sex", "categories": SEX},
            {"name": "age", "categories": AGE, "grouping": age_grouping},
            {"name": "ethnicity", "categories": ETHNICITY, "grouping": ETHNIC_GROUP},
            {"name": "religion", "categories": RELIGION},
            {"name": "qualification", "categories": QUALIFICATION},
            {"name": "marital", "categories": MARITAL},
        ]},
        "households": {"attributes": [
            {"name": "size", "categories": SIZES},
            {"name": "type", "categories": TYPES},
            {"name": "composition", "categories": list(COMPOSITIONS)},
        ]},
    }


def person_rules():
    return {"rules": [{
        "name": "under_18_married",
        "message": "a person under 18 cannot be married",
        "when": {"age": CHILD_BINS, "marital": ["married", "separated", "divorced", "widowed"]},
    }]}


def household_rules():
    rules = []
    for code, (size, htype, _) in COMPOSITIONS.items():
        rules.append({
            "name": f"size_of_{code.replace(' ', '_')}",
            "message": f"composition '{code}' has {size} member(s)",
            "when": {"composition": [code], "size": [s for s in SIZES if s != str(size)]},
        })
        rules.append({
            "name": f"type_of_{code.replace(' ', '_')}",
            "message": f"composition '{code}' is a {htype} household",
            "when": {"composition": [code], "type": [t for t in TYPES if t != htype]},
        })
    return {"rules": rules}


PERSON_TABLES = [
    ("sex_age_ethnicity", ["sex", "age", "ethnicity"]),
    ("sex_age_religion", ["sex", "age", "religion"]),
    ("sex_age_qualification", ["sex", "age", "qualification"]),
    ("sex_age_marital", ["sex", "age", "marital"]),
]


def config(persons, households, generations, population, out):
    person_objectives = [
        {"name": "sex", "table": "sex_age_ethnicity", "attribute": "sex"},
        {"name": "age", "table": "sex_age_ethnicity", "attribute": "age"},
        {"name": "ethnicity", "table": "sex_age_ethnicity", "attribute": "ethnicity"},
        {"name": "religion", "table": "sex_age_religion", "attribute": "religion"},
        {"name": "qualification", "table": "sex_age_qualification", "attribute": "qualification"},
    ]
    household_objectives = [
        {"name": name, "table": "size_type_composition", "attribute": name}
        for name in ("size", "type", "composition")
    ]
    for o in person_objectives + household_objectives:
        o.update({"metric": "trapezoid", "weight": 1.0})
    evolution = {"population_size": population, "generations": generations,
                 "crossover_probability": 0.9, "mutation_probability": 0.2, "seed": 42,
                 "max_retries": 100, "archive_capacity": 0, "resample_probability": 0.0}
    person_evolution = dict(evolution, crossover_probability=0.3,
                            resample_probability=0.0025)
    return {
        "region_id": "MSOA-DEMO",
        "schema": "schema.json",
        "person_tables": [{"name": n, "path": n + ".csv"} for n, _ in PERSON_TABLES],
        "household_tables": [{"name": "size_type_composition",
                              "path": "size_type_composition.csv"}],
        "person_rules": "person_rules.json",
        "household_rules": "household_rules.json",
        "output_dir": out,
        "targets": {"persons": persons, "households": households},
        "age_attribute": "age",
        "composition_attribute": "composition",
        "size_attribute": "size",
        "allocation_order": "largest_first",
        "validation": {"tolerance": 0.01, "strict": False},
        "workers": 4,
        "persons": {"objectives": person_objectives, "evolution": person_evolution,
                    "joint_sampling_table": "sex_age_marital"},
        "households": {"objectives": household_objectives, "evolution": dict(evolution),
                       "joint_sampling_table": "size_type_composition"},
    }


def dump(path, doc):
    path.write_text(json.dumps(doc, indent=2) + "\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out_dir", type=pathlib.Path)
    args = parser.parse_args()
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)

    rng = random.Random(SEED)
    households, persons = ground_truth(rng, TARGET_PERSONS)
    s = schema()
    cats = {a["name"]: a["categories"] for a in s["persons"]["attributes"]}
    hcats = {a["name"]: a["categories"] for a in s["households"]["attributes"]}

    dump(out / "schema.json", s)
    dump(out / "person_rules.json", person_rules())
    dump(out / "household_rules.json", household_rules())
    for name, axes in PERSON_TABLES:
        write_table(out / (name + ".csv"), axes, cats, persons)
    write_table(out / "size_type_composition.csv", ["size", "type", "composition"], hcats,
                households)

    n_households = len(households)
    dump(out / "config.json", config(TARGET_PERSONS, n_households, 100, 100, "out"))
    small_households = round(n_households * 200 / TARGET_PERSONS)
    dump(out / "config_small.json", config(200, small_households, 50, 20, "out_small"))
    print(f"{len(persons)} persons in {n_households} households")


if __name__ == "__main__":
    main()
