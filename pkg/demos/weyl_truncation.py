"""Why the Weyl relation needs a padded workspace.

exp_q(s a) exp_q(t a^dag) sums over intermediate occupations above the row
and column labels.  Computed on the truncated space, the product loses
everything above the cutoff.  Computed on a larger space and read back on
the safe sector, it agrees with the reordered form to rounding.
"""

from glq import FockSpace, WeylParams, check_weyl_relation

params = WeylParams((0.4,), (0.3,), 0.5)
space = FockSpace(1, 10)
bare = check_weyl_relation(params, space, margin=5, padding=0)
padded = check_weyl_relation(params, space, margin=5)
for b, p in zip(bare, padded):
    print(f"{p.equation:<7} {p.relation}")
    print(f"        truncated space: {b.max_residual:.1e}   padded: {p.max_residual:.1e}")
