#!/usr/bin/env python3
"""Convert the UCI Adult census files into the 123-feature binary svmlight
encoding used by the LIBSVM "a9a" distribution.

Layout (1-based feature indices):
  age 1-5, workclass 6-13, fnlwgt 14-18, education 19-34,
  education-num 35-39, marital-status 40-46, occupation 47-60,
  relationship 61-66, race 67-71, sex 72-73, capital-gain 74-75,
  capital-loss 76-77, hours-per-week 78-82, native-country 83-123.

Continuous attributes are cut into quintiles estimated on the training file;
capital-gain/loss use a zero / positive split. Categoricals are one-hot. A
missing value ("?") produces no active feature for that attribute. Labels are
+1 for ">50K" and -1 otherwise.

Usage: adult_to_svmlight.py adult.data adult.test out_train.gz out_test.gz
"""
import bisect
import gzip
import sys

CATEGORIES = {
    "workclass": "Private, Self-emp-not-inc, Self-emp-inc, Federal-gov, Local-gov, State-gov, Without-pay, Never-worked",
    "education": "Bachelors, Some-college, 11th, HS-grad, Prof-school, Assoc-acdm, Assoc-voc, 9th, 7th-8th, 12th, Masters, 1st-4th, 10th, Doctorate, 5th-6th, Preschool",
    "marital-status": "Married-civ-spouse, Divorced, Never-married, Separated, Widowed, Married-spouse-absent, Married-AF-spouse",
    "occupation": "Tech-support, Craft-repair, Other-service, Sales, Exec-managerial, Prof-specialty, Handlers-cleaners, Machine-op-inspct, Adm-clerical, Farming-fishing, Transport-moving, Priv-house-serv, Protective-serv, Armed-Forces",
    "relationship": "Wife, Own-child, Husband, Not-in-family, Other-relative, Unmarried",
    "race": "White, Asian-Pac-Islander, Amer-Indian-Eskimo, Other, Black",
    "sex": "Female, Male",
    "native-country": "United-States, Cambodia, England, Puerto-Rico, Canada, Germany, Outlying-US(Guam-USVI-etc), India, Japan, Greece, South, China, Cuba, Iran, Honduras, Philippines, Italy, Poland, Jamaica, Vietnam, Mexico, Portugal, Ireland, France, Dominican-Republic, Laos, Ecuador, Taiwan, Haiti, Columbia, Hungary, Guatemala, Nicaragua, Scotland, Thailand, Yugoslavia, El-Salvador, Trinadad&Tobago, Peru, Hong, Holand-Netherlands",
}
CATEGORIES = {k: [c.strip() for c in v.split(",")] for k, v in CATEGORIES.items()}

# (name, kind) in file column order; kind is "quintile", "sign" or "cat".
COLUMNS = [
    ("age", "quintile"),
    ("workclass", "cat"),
    ("fnlwgt", "quintile"),
    ("education", "cat"),
    ("education-num", "quintile"),
    ("marital-status", "cat"),
    ("occupation", "cat"),
    ("relationship", "cat"),
    ("race", "cat"),
    ("sex", "cat"),
    ("capital-gain", "sign"),
    ("capital-loss", "sign"),
    ("hours-per-week", "quintile"),
    ("native-country", "cat"),
]


def read_rows(path):
    rows = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("|"):
                continue
            fields = [t.strip() for t in line.split(",")]
            if len(fields) != 15:
                raise ValueError(f"{path}: unexpected field count: {line!r}")
            label = +1 if fields[14].rstrip(".") == ">50K" else -1
            rows.append((fields[:14], label))
    return rows


def quintile_cuts(values):
    values = sorted(values)
    n = len(values)
    cuts = []
    for q in (1, 2, 3, 4):
        cut = values[min(n - 1, (q * n) // 5)]
        if not cuts or cut > cuts[-1]:
            cuts.append(cut)
    return cuts


def build_encoder(train_rows):
    cuts = {}
    for col, (name, kind) in enumerate(COLUMNS):
        if kind == "quintile":
            cuts[name] = quintile_cuts(float(r[0][col]) for r in train_rows if r[0][col] != "?")
    offsets = []
    next_index = 1
    for name, kind in COLUMNS:
        offsets.append(next_index)
        next_index += {"quintile": 5, "sign": 2}.get(kind, 0) or len(CATEGORIES[name])
    assert next_index - 1 == 123, next_index

    def encode(fields):
        active = []
        for col, (name, kind) in enumerate(COLUMNS):
            raw = fields[col]
            if raw == "?":
                continue
            if kind == "cat":
                active.append(offsets[col] + CATEGORIES[name].index(raw))
            elif kind == "sign":
                active.append(offsets[col] + (1 if float(raw) > 0 else 0))
            else:
                active.append(offsets[col] + bisect.bisect_right(cuts[name], float(raw)))
        return sorted(active)

    return encode


def write(rows, encode, path):
    # mtime=0 keeps the archive byte-stable across regenerations.
    with open(path, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as out:
        for fields, label in rows:
            feats = " ".join(f"{i}:1" for i in encode(fields))
            out.write(f"{label:+d} {feats}\n".encode())


def main(argv):
    if len(argv) != 5:
        sys.exit(__doc__)
    train = read_rows(argv[1])
    test = read_rows(argv[2])
    encode = build_encoder(train)
    write(train, encode, argv[3])
    write(test, encode, argv[4])
    print(f"train: {len(train)} rows, test: {len(test)} rows")


if __name__ == "__main__":
    main(sys.argv)
