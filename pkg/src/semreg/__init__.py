"""semreg: a semantic service registry.

UDDI-style storage (tModels, businesses, services, category bags) combined
with a DAML+OIL-subset ontology layer that answers four discovery questions:
by functionality, by complementary service, by add-on product, and by
product-instance attributes.
"""

from .errors import SemRegError

__version__ = "0.1.0"

__all__ = ["SemRegError", "__version__"]
