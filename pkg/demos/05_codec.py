"""Encode the transmitted vectors and compare with a dense packet."""
from pathlib import Path

import numpy as np

from cscontrol import ControlVector, load_config, run_closed_loop
from cscontrol.codec import compression_ratio, decode_control, dense_packet_size, encode_control

exp = load_config(Path(__file__).resolve().parents[1] / "configs" / "baseline.toml")
r = run_closed_loop(exp.run)

theta = ControlVector(r.thetas[50])
packet = encode_control(theta, 50)
k, back = decode_control(packet, theta.N)
print(f"period {k}: {theta.support_count} entries -> {len(packet)} bytes, dense {dense_packet_size(theta.N)}")
print("round trip exact:", back.theta.tobytes() == theta.theta.tobytes())
print("header + first entry:", packet[:24].hex(" "))
print(f"bytes per period: min {min(r.bytes_per_period)}, max {max(r.bytes_per_period)}, "
      f"mean {np.mean(r.bytes_per_period):.1f}")
print(f"compression ratio over the run: {compression_ratio(r):.3f}")
