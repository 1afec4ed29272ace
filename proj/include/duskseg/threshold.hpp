#pragma once

#include "duskseg/raster.hpp"
#include "duskseg/soft_tensor.hpp"

namespace duskseg {

/// Converts a soft prediction to a hard map under confidence threshold
/// theta in [1/C, 1]: argmax class where its probability >= theta, else
/// kInvalidLabel. At theta == 1/C no pixel is invalidated (the channel
/// maximum of a C-distribution is >= 1/C; enforcing this directly keeps
/// float32 rounding from invalidating a uniform pixel).
SemanticLabelMap threshold_apply(const SoftPredictionTensor& soft, double theta);

} // namespace duskseg
