#!/usr/bin/env python3
"""Regenerates fixtures/smoke_qa.jsonl: 20 synthetic multi-document QA
samples in the canonical dataset schema. Every answer appears verbatim in
exactly one document, so a faithful compressor can preserve it and a
context-free baseline cannot recover it.
"""

import json
import random
from pathlib import Path

TOWNS = ["Velden", "Marlow", "Ostey", "Brinmore", "Calverton", "Dunfirth",
         "Eastvale", "Foxburgh", "Glenreach", "Harwick"]
SURNAMES = ["Aldren", "Bexley", "Corvane", "Deverell", "Ellsworth", "Fenwick",
            "Garrowby", "Halvorsen", "Inglewood", "Jarratt"]
FIELDS = ["tidal patterns", "alpine flora", "river sediments", "meteor showers",
          "glacial retreat", "migratory birds", "volcanic soils", "coastal fog",
          "cave systems", "prairie grasses"]
FILLER = [
    "Local records from the period are preserved in the regional archive.",
    "The site attracts a steady stream of visiting researchers each season.",
    "Funding for the program came from a consortium of nearby universities.",
    "Several follow-up surveys confirmed the original findings.",
    "The surrounding district is otherwise known for its textile mills.",
    "Annual reports describe gradual improvements to the facilities.",
    "A narrow-gauge railway once connected the site to the coast.",
    "Contemporary newspapers covered the opening at some length.",
]


def main() -> None:
    rng = random.Random(7311)
    out_path = Path(__file__).resolve().parent.parent / "fixtures" / "smoke_qa.jsonl"
    with out_path.open("w", encoding="utf-8") as out:
        for i in range(20):
            town = TOWNS[i % len(TOWNS)]
            surname = SURNAMES[i % len(SURNAMES)]
            field = FIELDS[i % len(FIELDS)]
            year = 1871 + rng.randrange(120)

            if i % 2 == 0:
                question = f"In which year was the {town} field station established?"
                answer = str(year)
                fact = (f"The {town} field station was established in {year} to "
                        f"study {field}.")
            else:
                question = f"Who founded the research station at {town}?"
                answer = f"{surname}"
                fact = (f"The research station at {town} was founded by "
                        f"{surname}, whose early work on {field} drew wide "
                        f"attention.")

            fact_doc = {
                "title": f"{town} research station",
                "text": " ".join([fact] + rng.sample(FILLER, 3)),
            }
            decoy_town = TOWNS[(i + 3) % len(TOWNS)]
            decoy_doc = {
                "title": f"{decoy_town} district",
                "text": " ".join(
                    [f"{decoy_town} lies in a neighboring valley and hosts no "
                     f"research facilities of its own."] + rng.sample(FILLER, 3)),
            }
            third_doc = {
                "title": f"Studies of {field}",
                "text": " ".join(
                    [f"Systematic studies of {field} expanded rapidly during the "
                     f"late nineteenth and twentieth centuries."] + rng.sample(FILLER, 2)),
            }
            docs = [decoy_doc, fact_doc, third_doc] if i % 3 else [fact_doc, decoy_doc, third_doc]

            out.write(json.dumps({
                "id": f"smoke-{i:04d}",
                "question": question,
                "context": docs,
                "answers": [answer],
            }, ensure_ascii=False) + "\n")
    print(f"wrote 20 samples to {out_path}")


if __name__ == "__main__":
    main()
