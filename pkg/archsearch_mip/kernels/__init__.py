from archsearch_mip.kernels.features import FeatureBlock, GramComponents, featurize, gram, gram_components, self_components
from archsearch_mip.kernels.graph_kernels import (
    KernelForm,
    KernelParams,
    PathCounts,
    combined_kernel,
    edge_kernel,
    infer_vocabulary,
    linear_kernel,
    linear_kernel_range,
    node_kernel,
    path_count_product,
    path_counts,
    sp_kernel,
)

__all__ = [
    "FeatureBlock",
    "GramComponents",
    "KernelForm",
    "KernelParams",
    "PathCounts",
    "combined_kernel",
    "edge_kernel",
    "featurize",
    "gram",
    "gram_components",
    "infer_vocabulary",
    "linear_kernel",
    "linear_kernel_range",
    "node_kernel",
    "path_count_product",
    "path_counts",
    "self_components",
    "sp_kernel",
]
