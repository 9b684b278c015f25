# coding: utf-8

# # Toeplitz hashing of a measured register

# Measuring a purified qubit in the computational basis leaves a classical
# register A correlated with the environment E. Hashing A with a random
# Toeplitz matrix compresses it into nearly uniform bits.

# In[1]:

from coherand import DensityMatrix, ToeplitzFamily, certify_universal2, expected_d1, hash_cq
from coherand.extraction import leftover_bound, measured_cq
from coherand.hashing import HashFunction, apply_hash
from coherand.security import d1


# A Toeplitz matrix is fixed by its first row and column, so m + k - 1 seed bits
# describe a k x m matrix.

# In[2]:

fam = ToeplitzFamily(3, 2)
f = HashFunction.from_bits(fam, "1011")
print(f.matrix)
print(apply_hash(f, "101"))


# Exhaustive pair counting certifies the family as universal-2: no two distinct
# inputs collide with probability above 2^-k.

# In[3]:

print(certify_universal2(fam))


# Now the register itself: three copies of the mixed qubit give eight labels.

# In[4]:

rho = DensityMatrix.from_bloch(0.6, 0.0, 0.0)
cq = measured_cq(rho, 3)
print(cq)
print("d1 before hashing:", d1(cq))


# Hashing with one member gives one output state. Averaging d1 over the whole
# family gives the quantity the leftover hash lemma bounds.

# In[5]:

fam = ToeplitzFamily(3, 1)
print("one member:", d1(hash_cq(cq, fam.member(5))))
mean, _ = expected_d1(cq, fam)
print("family average:", mean, "bound:", leftover_bound(cq, 2))
