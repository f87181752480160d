"""Mutual information, the unconstrained optimum and the shapes it takes."""

# %%
import numpy as np

from switchbf import ArrayGeometry, ChannelConfig, LinkBudget, generate_channel, mutual_information, optimal_precoder
from switchbf.metrics import optimal_mutual_information

h = generate_channel(ChannelConfig(8, 10, ArrayGeometry.sector(8, 8), ArrayGeometry(4, 4), seed=1)).h

# %% SNR is swept through rho with unit noise variance.
for snr in (-10, 0, 10):
    b = LinkBudget.from_snr_db(snr, n_streams=2)
    uop = optimal_precoder(h, 2)
    print(f"{snr:+4d} dB  UOP {mutual_information(h, uop, b):6.3f} bits/s/Hz"
          f"  (closed form {optimal_mutual_information(h, b):6.3f})")

# %% A random semi-unitary precoder does much worse than the eigenmodes.
rng = np.random.default_rng(0)
q, _ = np.linalg.qr(rng.standard_normal((64, 2)) + 1j * rng.standard_normal((64, 2)))
b = LinkBudget(1.0, 2)
print("random semi-unitary:", round(mutual_information(h, q, b), 3))
print("eigenmodes:        ", round(mutual_information(h, optimal_precoder(h, 2), b), 3))
