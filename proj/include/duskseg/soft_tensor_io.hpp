#pragma once

#include <filesystem>

#include "duskseg/soft_tensor.hpp"

namespace duskseg {

/// Binary soft-tensor container. Little-endian header:
///   magic "SFTP", version u16 (=1), height u32, width u32, channels u16,
/// then H*W*C float32 payload, planar row-major, channel-major (all of
/// channel 0, then channel 1, ...). Values must be finite and channel sums
/// within 1e-3 of 1.
inline constexpr char kSoftTensorMagic[4] = {'S', 'F', 'T', 'P'};
inline constexpr std::uint16_t kSoftTensorVersion = 1;

/// Reads and validates. normalize=true (the default) renormalizes each
/// pixel to sum exactly to 1 for downstream use; normalize=false returns
/// the stored values bit-for-bit (storage-level round trips).
SoftPredictionTensor read_soft_tensor(const std::filesystem::path& path, bool normalize = true);

/// Writes the tensor's current values; a raw read of the written file
/// returns them bit-for-bit.
void write_soft_tensor(const std::filesystem::path& path, const SoftPredictionTensor& tensor);

} // namespace duskseg
