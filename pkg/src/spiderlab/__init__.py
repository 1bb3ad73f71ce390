"""spiderlab: adaptive virtual-spider simulation lab and biosignal analysis toolkit.

The package has three layers:

* content space and adaptation policies (``spider``, ``reward``, ``agents``,
  ``subjects``, ``session``),
* offline physiological signal processing (``signals``),
* experiment statistics and clustering (``stats``).

``cli`` wires them together behind the ``spiderlab`` command.
"""

__version__ = "0.1.0"

from .spider import SpiderAttributes, AttributeAction, encode, decode

__all__ = ["SpiderAttributes", "AttributeAction", "encode", "decode", "__version__"]
