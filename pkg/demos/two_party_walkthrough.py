# Walk through one two-party run on a small Clifford+T circuit.
import numpy as np

from mpqc import protocols, qsim
from mpqc.circuits import depth_sweep_circuit

rng = np.random.default_rng(11)
F = depth_sweep_circuit(3, num_qubits=2)
print("circuit gates:", [(g.kind, g.targets) for g in F.gates])

x = qsim.random_state(1, rng)  # Alice's qubit
y = qsim.random_state(1, rng)  # Bob's qubit

res = protocols.run_two_party(F, x, y, seed=11)
want = qsim.run_circuit(qsim.tensor(x, y), F.pairs())
print("rounds:", res.rounds)
print("fidelity with direct simulation:", qsim.fidelity(res.outputs[0], want))

# the message flow, one line per round
for i, rnd in enumerate(res.transcript.rounds, 1):
    print(f"  round {i}: {len(rnd.messages)} message(s), tags {sorted({m.tag for m in rnd.messages})}")
