"""
GKR distance on a small tree
============================

Two measures with different total mass are compared on a weighted tree.
Mass may be moved along the tree, destroyed where it starts or created
where it is needed; each unit pays the corresponding cost.
"""

# the tree is a path 0 - 1 - 2 with edge lengths 5 and 1
from treegkr import CostParams, gkr_coupling, gkr_distance, validate_tree

tree = validate_tree([(0, 1, 5), (1, 2, 1)], 3)
a = [3, 0, 0]
b = [0, 3, 1]

###############################################################################
# With a constant cost of 2 per unit created or destroyed, shipping mass over
# the long edge (length 5) is dearer than destroying it at node 0 (2) and
# creating it again at node 1 (2).
costs = CostParams.constant(3, 2)
res = gkr_distance(tree, a, b, costs)
print("distance:", res.distance)

res, plan = gkr_coupling(tree, a, b, costs)
print("flows:", plan.flows)
print("destroyed:", plan.destroyed)
print("created:", plan.created)

###############################################################################
# Raising the cost makes transport worthwhile again; with infinite costs the
# totals must agree, and the value becomes the tree Wasserstein distance.
for lam in (2, 3, 10):
    print(lam, gkr_distance(tree, a, b, CostParams.constant(3, lam)).distance)

b_balanced = [0, 2, 1]
print("W1:", gkr_distance(tree, a, b_balanced, CostParams.constant(3, float("inf"))).distance)

###############################################################################
# The flow-based oracle gives the same value.
from treegkr import gkr_oracle

print("oracle:", gkr_oracle(tree, a, b, costs))
