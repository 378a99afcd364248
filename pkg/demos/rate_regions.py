"""
Inner-bound rate regions
========================

Each auxiliary distribution gives a polytope of rate pairs; the region is
their union, reduced to its Pareto frontier.  For the noiseless bit-pipe
both coding schemes reach the two corners and the line between them.
"""

from cqbroadcast import load_example
from cqbroadcast.regions import (SearchConfig, marton_region, single_user_holevo,
                                 superposition_region)

for name in ("noiseless", "bsc_like", "product_b2_constant"):
    ch = load_example(name)
    cap1, _ = single_user_holevo(ch, 1)
    cap2, _ = single_user_holevo(ch, 2)
    print(f"\n{name}: max I(X;B1) = {cap1:.4f}, max I(X;B2) = {cap2:.4f}")
    for build in (superposition_region, marton_region):
        cfg = SearchConfig(grid_resolution=9, random_restarts=40 if name == "bsc_like" else 0)
        region = build(ch, cfg)
        corners = [p for p in region.frontier if p.r1 < 1e-9 or p.r2 < 1e-9]
        print(f"  {region.scheme:13s} {len(region.frontier):3d} frontier points, "
              f"max R1+R2 = {region.max_sum_rate():.4f}, axis points "
              + ", ".join(f"({p.r1:.3f}, {p.r2:.3f})" for p in corners))
