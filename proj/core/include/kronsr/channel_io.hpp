#pragma once

// JSON (de)serialization of channel instances so that solver runs can be
// replayed. Schema "kronsr.channel/1":
//
//   { "schema": "kronsr.channel/1",
//     "geometry": {"R","T","L","N","P_BS","P_MS"},
//     "protocol_config": {"K_I","K_P","amplitude": "inv_sqrt_n" | "inv_sqrt_l"},
//     "channel": {"irs_aoa": [..], "ms_aod", "bs_aoa": [..], "irs_aod",
//                 "beta_ms": [[re,im],..], "beta_bs": [[re,im],..],
//                 "h_ms": M, "h_bs": M},
//     "protocol": {"x": M, "theta": M},
//     "model": {"phi_l": M, "phi_t": M, "phi_r": M, "y_tilde": [[re,im],..], "sigma2"} }
//
// where M = {"rows": r, "cols": c, "data": [[re,im],..]} in column-major order
// and angles are 0-based grid indices.

#include <kronsr/irs_channel.hpp>

#include <filesystem>
#include <string>

namespace kronsr {

inline constexpr const char* kChannelSchema = "kronsr.channel/1";

std::string channel_to_json(const ChannelInstance& inst, int indent = 2);

/// Throws InvalidInput on malformed or inconsistent documents.
ChannelInstance channel_from_json(const std::string& text);

void save_channel(const ChannelInstance& inst, const std::filesystem::path& path);
ChannelInstance load_channel(const std::filesystem::path& path);

}  // namespace kronsr
