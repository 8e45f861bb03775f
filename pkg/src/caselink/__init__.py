"""Cryptoasset case linkage toolkit.

Links criminal case files through the payment addresses they reference:
addresses are clustered into entities via multi-input co-spending, entities
into a value-flow graph, and case files into case clusters at address,
entity, or collector granularity. A small zoned HTTP service exposes the
result to investigators; a scenario generator provides ground truth.
"""

__version__ = "0.1.0"
