# Why qubit flipping matters, and what a masked wire looks like from outside.
import numpy as np

from mpqc import dqre, protocols, qsim
from mpqc.circuits import quantum_corpus

rng = np.random.default_rng(5)

off = protocols.flipping_experiment(2000, rng, flipping=False)
on = protocols.flipping_experiment(2000, rng, flipping=True)
print("intermediate-state fidelity without flipping:", off.mean())
print("intermediate-state fidelity with flipping:   ", on.mean())

F = next(c for c in quantum_corpus(30) if c.num_qubits == 2)
avg = dqre.masked_marginal_average(dqre.compile(F), qsim.random_state(2, rng), 500, rng)
worst = max(np.abs(rho - np.eye(2) / 2).max() for rho in avg.values())
print(f"{len(avg)} masked wires, max distance from I/2: {worst:.2e}")
