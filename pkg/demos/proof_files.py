"""Writing, reading, checking and unfolding proof files, and what the
checker says about a tampered proof.

Run with: python3 demos/proof_files.py
"""
from hybridmu.proof import check_proof, deserialize, serialize, show_unfolded, unfold_proof
from hybridmu.prover import prove
from hybridmu.syntax import parse

text = serialize(prove(parse("nu x. []x")).proof)
print(text)

proof = deserialize(text)
print(check_proof(proof))
print(show_unfolded(unfold_proof(proof, 16)))

# swap the Reset for a Weak: a Weak premise must be part of its conclusion,
# and the Reset it replaced changed annotations
tampered = deserialize(text.replace("reset x.1", "weak"))
print(check_proof(tampered))
# drop a name from one control: caught at the step that changes it
tampered = deserialize(text.replace("x.0 x.1 |- @'_n1", "x.0 |- @'_n1"))
print(check_proof(tampered))
