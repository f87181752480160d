"""Binary analog precoders by norm maximization (SHD-NM).

The design linearizes ``||V_1^H F_RF||_F^2``, takes the box-LP vertex, and
keeps the step only if the true mutual information does not drop.  When
stuck it restarts the linearization from a Gaussian draw around the current
iterate.
"""

# %%
import numpy as np

from switchbf import (ArrayGeometry, ChannelConfig, LinkBudget, NmConfig, design_shd_nm, generate_channel,
                      mutual_information, optimal_precoder)

h = generate_channel(ChannelConfig(8, 10, ArrayGeometry.sector(8, 8), ArrayGeometry(4, 4), seed=2)).h
budget = LinkBudget.from_snr_db(0.0, 2)

report = design_shd_nm(h, budget, k_t=4, config=NmConfig(seed=0))
print("accepted steps:", report.outer_iters, " random draws:", report.random_draws)
print("MI trace (first few):", np.round(report.mi_trace[:6], 3))
# With channel seed 3 the same call accepts no step at all: every LP vertex
# reachable from the draws has lower mutual information than the random start.
print("SHD-NM:", round(report.mutual_information, 3),
      " UOP:", round(mutual_information(h, optimal_precoder(h, 2), budget), 3))

# %% The analog part is a 0/1 switch matrix; the digital part restores equal power.
f_rf = report.precoder.f_rf
print("antennas per RF chain:", f_rf.sum(axis=0).astype(int))
f = report.precoder.f
print("F^H F =\n", np.round(f.conj().T @ f, 10).real)
