"""Partially connected switch networks."""

# %%
from switchbf import (ArrayGeometry, ChannelConfig, LinkBudget, NmConfig, QrquConfig, design_shd_nm,
                      design_shd_qrqu, generate_channel, interleaved_spec, subset_partition, validate)

spec = interleaved_spec(64, 4, period=2)
print("interleaved: s_t =", spec.s_t, " c_t =", spec.c_t, " connections =", spec.n_connections,
      " violations:", validate(spec))
print("first rows:\n", spec.g[:4])

# %% Designs never switch on a forbidden connection.
h = generate_channel(ChannelConfig(8, 10, ArrayGeometry.sector(8, 8), ArrayGeometry(4, 4), seed=5)).h
b = LinkBudget(1.0, 2)
for name, mask in (("full", None), ("interleaved", spec), ("subsets", subset_partition(64, 4))):
    nm = design_shd_nm(h, b, 4, NmConfig(seed=1), mask)
    qr = design_shd_qrqu(h, b, 4, QrquConfig(seed=1), mask)
    print(f"{name:12s} SHD-NM {nm.mutual_information:6.3f}   SHD-QRQU {qr.mutual_information:6.3f}")
