"""Write a payload into labels along a path of the binary tree.

A condition labels finitely many binary strings with 0, 1 or bot and
forbids some infinite paths.  Each round a selector extends the condition
away from the coding path, then the next payload bit is written on the
shortest fresh string along that path.  Reading the labels down the path
recovers the payload.
"""

from graphable.forcing import (add_forbidden_selector, build_generic, empty_condition,
                               eval_labels, extends, label_elsewhere_selector)
from graphable.oracles import bits_from_string, random_stream

x = random_stream(11)
payload = bits_from_string("100111010")
selectors = [label_elsewhere_selector(x, seed=1), add_forbidden_selector(seed=2)]

g = build_generic(empty_condition(), selectors, x, payload, rounds=9)
print("conditions in chain:", len(g.chain))
print("each one extends the last:",
      all(extends(q, p) for p, q in zip(g.chain, g.chain[1:])))
print("labels along x:", eval_labels(g, x, g.depth))
print("payload:       ", "".join(map(str, g.coded)))
print("depth reached: ", g.depth)
