"""Hybrid ledger/edge access control for electronic health records.

Subpackages:
  policylang  authorization-language lexer/parser/serializer
  pdp         attribute-based decision engine
  chainacl    ledger-side rule model and checker
  ledger      hash-chained single-node ledger and participant registry
  edge        off-chain record store, digests, one-time URL vault
  gateway     end-to-end service binding the pieces, plus the HTTP API
  bench       experiment harness and CLI
"""

__version__ = "0.1.0"
