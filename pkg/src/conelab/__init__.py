"""conelab: distributional curvature of the conical metric by regularization.

The package smooths the conical metric with compactly supported kernel nets
and transport-operator nets, computes the scalar curvature of the smoothed
metrics, and verifies numerically that the curvature converges to the point
mass ``4 pi (1 - alpha) delta`` independently of the chosen regularization.
"""

from .kernels import (AdmissibilityReport, MollifierProfile, SmoothingKernelNet,
                      check_test_object, delta_product_demo, make_kernel_net,
                      make_polynomial_profile)
from .transport import (TensorTransport, TransportNet, check_admissible,
                        identity_transport, perturbed_transport, rotation_generator,
                        tensor_action)
from .fields import (AffineMap, SmoothedJetRequest, TensorField, bump_test_function,
                     conical_h, conical_metric, constant_field,
                     embed_negligibility_order, flat_top_test_function,
                     pullback_commutation_check, rotation_map, scaling_map,
                     smooth_jet, smooth_test_field, smoothed_jet_batch,
                     sphere_chart_metric)
from .geometry import (CurvatureResult, MetricJet, christoffel, gauss_bonnet_residual,
                       geodesic_curvature_circle, jet_from_field, metric_jet, riemann,
                       riemann_components, safe_inverse_det, scalar_curvature)
from .orderfit import (Extrapolation, OrderFitReport, fit_loglog_slope,
                       geometric_schedule, order_report, richardson_extrapolate)
from .quadrature import QuadratureSpec
from .association import (AssociationReport, ExperimentConfig, annulus_decay_check,
                          association_integral, convergence_study, det_bounds_check,
                          i1_gauss_bonnet, i2_bound, taylor_estimate_check)

__version__ = "0.1.0"
