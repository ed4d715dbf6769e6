from .inversion import DpcResult, dpc_from_intensities, dpc_invert, dpc_residual, dpc_solve
from .transfer import TransferPair, transfer_pairs_for, weak_object_transfer
