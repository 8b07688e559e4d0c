"""Remote superconducting-qubit entanglement through solid-state spin memories.

Submodules:

* :mod:`spinlink.lindblad` - photon/phonon/spin transfer under a master equation
* :mod:`spinlink.statevector` - single- and two-photon heralding algebra
* :mod:`spinlink.spin_levels` - NV0 levels, effective Rabi rates, optical efficiency
* :mod:`spinlink.rates` - closed-form link rates and gate-time derivation
* :mod:`spinlink.protocol_mc` - Monte-Carlo protocol simulation
* :mod:`spinlink.thermal` - heat budget below the mixing chamber
* :mod:`spinlink.cli` - command line entry point
"""

__version__ = "0.1.0"
