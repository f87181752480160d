"""Drawing clustered channels and looking at what comes out.

Run with ``python demos/01_channel.py``.
"""

# %% A 64-element transmitter with a 60 x 30 degree sector pattern and an
# omni 16-element receiver, 8 clusters of 10 rays each.
import numpy as np

from switchbf import ArrayGeometry, ChannelConfig, generate_channel, steering_vector
from switchbf.channel import channel_from_rays, read_channel, write_channel
from switchbf.metrics import numerical_rank

tx = ArrayGeometry.sector(8, 8)
rx = ArrayGeometry(4, 4)
cfg = ChannelConfig(n_clusters=8, n_rays=10, tx_geometry=tx, rx_geometry=rx, seed=7)
real = generate_channel(cfg)
print("H shape:", real.h.shape, " rays:", len(real.rays))

# %% Only a few directions carry most of the energy.
s = np.linalg.svd(real.h, compute_uv=False)
print("leading singular values:", np.round(s[:6], 2))
print("numerical rank:", numerical_rank(real.h))

# %% The matrix is a deterministic function of the stored rays.
rebuilt = channel_from_rays(real.rays, tx, rx, cfg.gamma)
print("rebuild error:", np.linalg.norm(rebuilt - real.h))

# %% Steering vectors are unit norm; at boresight every element has phase 0.
a = steering_vector(ArrayGeometry(2, 2), 0.0, np.pi / 2)
print("boresight response of a 2x2 array:", a.real)

# %% The MMWCH1 dump keeps the seed with the entries.
write_channel("/tmp/demo_channel.bin", real.h, seed=cfg.seed)
h, seed = read_channel("/tmp/demo_channel.bin")
print("round trip exact:", np.array_equal(h, real.h), " seed:", seed)
