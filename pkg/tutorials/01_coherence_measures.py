# coding: utf-8

# # Coherence measures of a single qubit

# A state is incoherent when its density matrix is diagonal in the computational
# basis. We compare two ways of measuring how far a state is from that set.

# In[1]:

import numpy as np

from coherand import DensityMatrix, c_f, c_r
from coherand.coherence import QubitBloch, qubit_measures, rates_coincide


# Build the mixed qubit with Bloch vector (0.6, 0, 0). It points along x, so all
# of its coherence sits in the off-diagonal entries.

# In[2]:

rho = DensityMatrix.from_bloch(0.6, 0.0, 0.0)
print(rho.matrix)


# The relative entropy of coherence is the entropy gained by dephasing.

# In[3]:

print("C_r =", c_r(rho))


# The coherence of formation minimizes the average pure-state coherence over
# decompositions. For qubits it has a closed form in the Bloch vector.

# In[4]:

print("C_r, C_f =", qubit_measures(QubitBloch.of(rho)))
print(c_f(rho))


# C_f is never below C_r. The two agree only on pure states and on
# incoherent ones.

# In[5]:

for name, state in [("mixed", rho), ("plus", DensityMatrix.plus()),
                    ("diagonal", DensityMatrix(np.diag([0.3, 0.7])))]:
    print(f"{name:9s} C_r={c_r(state):.6f} C_f={c_f(state).value:.6f} coincide={rates_coincide(state)}")


# A sweep of the Bloch radius along x shows the gap opening up for mixed
# states and closing again at the surface.

# In[6]:

for r in np.linspace(0.0, 1.0, 6):
    cr, cf = qubit_measures(QubitBloch(r, 0.0, 0.0))
    print(f"r={r:.1f}  C_r={cr:.4f}  C_f={cf:.4f}  gap={cf - cr:.4f}")
