"""Customer segmentation, offer-response trees and streaming rule management
for telecom offer targeting."""
from .errors import OfferforgeError

__version__ = "0.1.0"
__all__ = ["OfferforgeError", "__version__"]
