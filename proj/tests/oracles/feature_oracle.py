#!/usr/bin/env python3
"""Independent feature counter used to freeze golden feature vectors.

Reads .gasp files with its own tokenizer and evaluates the 52 cheap
features by hand-written formulas. It shares no code with the C++
extractor and must not read the manifest file.

usage: feature_oracle.py <program.gasp>...   (CSV on stdout)
"""
import math
import re
import sys

NAMES = """r a r_over_a r_over_a_sq r_over_a_cu a_over_r a_over_r_sq a_over_r_cu
frac_unary frac_binary frac_ternary frac_horn n_facts n_disj_facts frac_normal
frac_constraints frac_unary_sq frac_unary_cu frac_binary_sq frac_binary_cu
frac_ternary_sq frac_ternary_cu frac_horn_sq frac_horn_cu frac_normal_sq
frac_normal_cu frac_constraints_sq frac_constraints_cu facts_per_rule
facts_per_atom disj_facts_per_rule disj_facts_per_atom facts_per_rule_sq
facts_per_atom_sq disj_facts_per_rule_sq disj_facts_per_atom_sq ln1p_r ln1p_a
ln1p_facts ln1p_disj_facts horn_x_normal horn_x_constraints horn_x_unary
normal_x_constraints normal_x_unary constraints_x_unary horn_over_normal
constraints_over_normal unary_over_binary binary_over_ternary
ternary_over_unary constraints_over_horn""".split()


def split_top(s, sep):
    parts, depth, cur = [], 0, ""
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return parts


def rules_of(text):
    text = re.sub(r"%[^\n]*", "", text)
    for stmt in text.split("."):
        stmt = " ".join(stmt.split())
        if not stmt:
            continue
        if ":-" in stmt:
            head, body = stmt.split(":-", 1)
        else:
            head, body = stmt, ""
        head = re.sub(r"\sv\s", "|", " " + head + " ")
        head_atoms = {h.replace(" ", "") for h in head.split("|") if h.strip()}
        lits = []
        for lit in split_top(body, ","):
            lit = lit.strip()
            if not lit:
                continue
            neg = lit.startswith("not ")
            atom = lit[4:] if neg else lit
            lits.append((atom.replace(" ", ""), neg))
        yield head_atoms, lits


def counts(text):
    c = dict(r=0, unary=0, binary=0, ternary=0, horn=0, facts=0, disj=0, normal=0, cons=0)
    atoms = set()
    for head, body in rules_of(text):
        c["r"] += 1
        atoms |= head
        atoms |= {a for a, _ in body}
        nb = len(body)
        c["unary"] += nb == 1
        c["binary"] += nb == 2
        c["ternary"] += nb == 3
        negs = any(n for _, n in body)
        c["horn"] += len(head) <= 1 and not negs
        c["facts"] += len(head) == 1 and nb == 0
        c["disj"] += len(head) >= 2 and nb == 0
        c["normal"] += len(head) == 1
        c["cons"] += len(head) == 0
    c["a"] = len(atoms)
    return c


def div(x, y):
    return 0.0 if y == 0 else x / y


def features(c):
    r, a = float(c["r"]), float(c["a"])
    fu, fb, ft = div(c["unary"], r), div(c["binary"], r), div(c["ternary"], r)
    fh, fn, fc = div(c["horn"], r), div(c["normal"], r), div(c["cons"], r)
    nf, nd = float(c["facts"]), float(c["disj"])
    ra, ar = div(r, a), div(a, r)
    fpr, fpa, dpr, dpa = div(nf, r), div(nf, a), div(nd, r), div(nd, a)
    eps = 1e-9
    v = [r, a, ra, ra * ra, ra * ra * ra, ar, ar * ar, ar * ar * ar,
         fu, fb, ft, fh, nf, nd, fn, fc]
    for f in (fu, fb, ft, fh, fn, fc):
        v += [f * f, f * f * f]
    v += [fpr, fpa, dpr, dpa, fpr * fpr, fpa * fpa, dpr * dpr, dpa * dpa]
    v += [math.log1p(r), math.log1p(a), math.log1p(nf), math.log1p(nd)]
    v += [fh * fn, fh * fc, fh * fu, fn * fc, fn * fu, fc * fu]
    v += [fh / (fn + eps), fc / (fn + eps), fu / (fb + eps), fb / (ft + eps),
          ft / (fu + eps), fc / (fh + eps)]
    assert len(v) == 52 == len(NAMES)
    return v


def main(paths):
    print(",".join(["instance"] + NAMES))
    for p in paths:
        with open(p) as f:
            v = features(counts(f.read()))
        name = p.rsplit("/", 1)[-1]
        print(",".join([name] + [repr(x) for x in v]))


if __name__ == "__main__":
    main(sys.argv[1:])
