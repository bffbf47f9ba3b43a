"""Regenerate tests/fixtures/porter_pairs.tsv.

Uses NLTK's PorterStemmer in MARTIN_EXTENSIONS mode (a port of the
reference implementation) as the oracle.  NLTK is not a runtime or test
dependency; install it in a throwaway environment to rerun this script.
"""
from pathlib import Path

from nltk.stem.porter import PorterStemmer

ROOT = Path(__file__).resolve().parents[1]

CLASSIC = """
caresses ponies ties caress cats feed agreed plastered bled motoring sing
conflated troubled sized hopping tanned falling hissing fizzed failing filing
happy sky relational conditional rational valenci hesitanci digitizer
conformabli radicalli differentli vileli analogousli vietnamization
predication operator feudalism decisiveness hopefulness callousness formaliti
sensitiviti sensibiliti triplicate formative formalize electriciti electrical
hopeful goodness revival allowance inference airliner gyroscopic adjustable
defensible irritant replacement adjustment dependent adoption homologou
communism activate angulariti homologous effective bowdlerize probate rate
cease controll roll generalizations oscillators running archaeology
biology
""".split()

MEDICAL = """
diabetes diabetic hypertension hypertensive pregnancy pregnant chemotherapy
radiotherapy carcinoma metastatic metastases eligibility eligible criteria
inclusion exclusion patients patient admission admitted complaining
presenting presented shortness breathing dyspnea fatigue headaches nausea
vomiting abdominal tenderness elevated creatinine hemoglobin transfusion
randomized randomization placebo controlled investigational intravenous
infusion infusions dosage dosing tolerability efficacy participants
enrollment consenting consent informed willing unwilling history
cardiovascular myocardial infarction stroke seizures epilepsy asthma
allergic allergies antibiotics immunosuppressive immunodeficiency
hepatitis cirrhosis renal kidney failure dialysis oncology tumors
lymphoma leukemia surgical surgery postoperative anesthesia smoking
smoker alcoholism depression depressive anxiety cognitive dementia
""".split()

GENERAL = """
addition over stated relevance case decision ranked text corr state team
abstract inclusive track input comb alternatives word keywords improve
evaluation specified representations while footnote contributes contribution
throughout evaluated collections
""".split()


def main() -> None:
    stemmer = PorterStemmer(mode=PorterStemmer.MARTIN_EXTENSIONS)
    words = list(dict.fromkeys(CLASSIC + MEDICAL))
    words += GENERAL
    assert len(words) == len(set(words)) == 200
    lines = [f"{w}\t{stemmer.stem(w)}" for w in words]
    (ROOT / "tests" / "fixtures" / "porter_pairs.tsv").write_text("\n".join(lines) + "\n")
    # Porter is not idempotent on every stem; record what the reference does on a second pass
    restem = [f"{w}\t{stemmer.stem(stemmer.stem(w))}" for w in words]
    (ROOT / "tests" / "fixtures" / "porter_restem.tsv").write_text("\n".join(restem) + "\n")


if __name__ == "__main__":
    main()
