#!/usr/bin/env python3
"""Regenerates the synthetic debate-style fixture used by the end-to-end run.

Output is deterministic: python3 generate.py writes train.tsv (150 rows) and
test.tsv (50 rows) next to this script.
"""
import pathlib
import random

PEOPLE = ["Obama", "Romney", "McCain", "Clinton", "Kerry", "Gore", "Pence", "Dole",
          "Bernanke", "Greenspan", "Netanyahu", "Powell"]
PLACES = ["Texas", "Ohio", "Mexico", "Pakistan", "Baltimore", "Cleveland", "Alabama",
          "Japan", "Iraq", "Florida"]
ORGS = ["Boeing", "the NRA", "Google", "the CDC", "the Democratic Party", "Congress"]
NUMBERS = ["3", "12", "23", "40", "7.5", "100", "250", "1.2", "60", "18"]
UNITS = ["percent", "million jobs", "billion dollars", "thousand troops", "percent of families"]

CLAIMS = [
    "{p} voted to cut {n} {u} from the budget in {l}.",
    "Unemployment in {l} increased by {n} {u} last year.",
    "We passed a law that created {n} {u} across {l}.",
    "{o} spent {n} {u} on lobbying while {p} was in office.",
    "The deficit grew {n} {u} under {p}.",
    "{p} raised taxes on {n} {u} in {l}.",
    "Our plan builds {n} new schools and hires {n2} teachers in {l}.",
    "{p} said the tax cut would cost {n} {u}.",
    "Since {y}, {l} has lost {n} {u}.",
    "{o} reported that {n} {u} moved to {l} in {y}.",
]
OPINIONS = [
    "I think {p} is a decent man.",
    "We hope the people of {l} will be with us.",
    "Thank you all for coming tonight.",
    "That is just not right.",
    "I love this country.",
    "Let me finish my answer.",
    "Well, I believe we can do better.",
    "We feel strongly about family values.",
    "You know, it is a great honor to be here.",
    "I respect {p}, but I disagree with him.",
    "People want leadership they can trust.",
    "Good evening, everybody.",
    "We see a bright future ahead.",
    "That was a fair question.",
    "I am glad you asked that.",
    "Americans are tired of the same old politics.",
    "My friend {p} has a good heart.",
    "The families I met in {l} deserve better.",
    "I want to thank {o} for hosting us.",
    "{p} and I have known each other for years.",
    "We will fight for the folks in {l}.",
    "I was proud to campaign in {l} with {p}.",
    "Our values are what make {l} strong.",
    "I do not think {p} understands the problem.",
    "We have to come together in {l}.",
    "{p} is wrong about this, and he knows it.",
    "The people of {l} are hardworking people.",
    "I trust {o} less than I trust {p}.",
]


def fill(rng, template):
    return template.format(
        p=rng.choice(PEOPLE), l=rng.choice(PLACES), o=rng.choice(ORGS),
        n=rng.choice(NUMBERS), n2=rng.choice(NUMBERS), u=rng.choice(UNITS),
        y=rng.choice(["1996", "2004", "2008", "2010", "2012"]))


def main():
    rng = random.Random(2024)
    rows, seen = [], set()
    while len(rows) < 200:
        yes = rng.random() < 0.25
        pool = CLAIMS if yes else OPINIONS
        text = fill(rng, rng.choice(pool))
        if rng.random() < 0.25:
            first = text.split()[0]
            if first not in ("I",) and first not in PEOPLE and first not in PLACES:
                first_char = text[0].lower()
            else:
                first_char = text[0]
            text = rng.choice(["And ", "But ", "So ", "Now, "]) + first_char + text[1:]
        if text in seen:
            continue
        seen.add(text)
        # A few labels disagree with the surface cues, as real annotations do.
        if rng.random() < 0.05:
            yes = not yes
        rows.append((f"s{len(rows) + 1:03d}", text, "Yes" if yes else "No"))
    here = pathlib.Path(__file__).resolve().parent
    for name, part in (("train.tsv", rows[:150]), ("test.tsv", rows[150:])):
        with open(here / name, "w", encoding="utf-8", newline="\n") as f:
            f.write("Sentence_id\tText\tclass_label\n")
            for row in part:
                f.write("\t".join(row) + "\n")


if __name__ == "__main__":
    main()
