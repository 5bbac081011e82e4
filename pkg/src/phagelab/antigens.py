"""Human IL-6 antigen panel: the His-tagged wild type and 30 alanine mutants."""

import re

WILD_TYPE = "wild-type"

IL6_WILD_TYPE = (
    "MNSFSTSAFGPVAFSLGLLLVLPAAFPAPVPPGEDSKDVAAPHRQPLTSSERIDKQIRY"
    "ILDGISALRKETCNKSNMCESSKEALAENNLNLPKMAEKDGCFQSGFNEETCLVKIITGL"
    "LEFEVYLEYLQNRFESSEEQARAVQMSTKVLIQFLQKKAKNLDAITTPDPTTNASLLTKL"
    "QAQNQWLQDMTTHLILRSFKEFLQSSLRALRQMHHHHHH"
)

MUTANTS = (
    "P42A", "Q45A", "T48A", "E51A", "D54A", "I57A", "I60A", "G63A", "K69A", "C72A",
    "C78A", "S81A", "E87A", "L90A", "P93A", "D99A", "F102A", "G105A", "E108A", "T117A",
    "L120A", "L126A", "L129A", "S135A", "E138A", "Q144A", "F153A", "D162A", "T165A", "D168A",
)

TEST_MUTANTS = (
    "P42A", "T48A", "E51A", "I57A", "I60A", "K69A", "C78A", "S81A", "E87A",
    "L120A", "L126A", "L129A", "Q144A", "D162A", "T165A",
)
TRAIN_MUTANTS = tuple(m for m in MUTANTS if m not in TEST_MUTANTS)

_MUTATION = re.compile(r"([A-Z])(\d+)([A-Z])")


def parse_mutation(name: str) -> tuple[str, int, str]:
    """'P42A' -> ('P', 42, 'A'); positions are 1-based."""
    m = _MUTATION.fullmatch(name)
    if not m:
        raise ValueError(f"not a point-mutation name: {name!r}")
    return m.group(1), int(m.group(2)), m.group(3)


def apply_mutation(seq: str, name: str) -> str:
    wt, pos, new = parse_mutation(name)
    if pos < 1 or pos > len(seq) or seq[pos - 1] != wt:
        raise ValueError(f"{name} does not match residue {pos} of the sequence")
    return seq[:pos - 1] + new + seq[pos:]


def antigen_sequence(name: str, wild_type: str = IL6_WILD_TYPE) -> str:
    if name == WILD_TYPE:
        return wild_type
    return apply_mutation(wild_type, name)


def antigen_panel(names=None) -> dict:
    names = (WILD_TYPE,) + MUTANTS if names is None else names
    return {n: antigen_sequence(n) for n in names}


def normalize_antigen_name(label: str) -> str:
    """Map external antigen labels such as 'IL-6_P42A' or 'IL-6_WT' to panel names."""
    text = label.strip()
    m = re.search(r"([A-Z]\d+A)$", text)
    if m and m.group(1) in MUTANTS:
        return m.group(1)
    low = text.lower()
    if low.endswith(("wt", "wild-type", "wild_type", "wildtype")):
        return WILD_TYPE
    return text
