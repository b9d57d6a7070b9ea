#pragma once

// CSV and JSON emission of trial records and summaries.
//
// CSV (schema kronsr.records/1): a first comment line
//   # schema=kronsr.records/1 config_hash=<hex>
// followed by the header
//   scenario,algorithm,snr_db,m,S,trial,seed,rmse,srr,ser,denoise_before_db,
//   denoise_after_db,wall_time_s,status
// Fields that do not apply (or failed metrics) are left empty.

#include <kronsr/experiments.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace kronsr {

inline constexpr const char* kRecordsSchema = "kronsr.records/1";
inline constexpr const char* kSummarySchema = "kronsr.summary/1";

std::string csv_header();

/// One CSV line (no newline) for a record.
std::string csv_row(const TrialRecord& r);

void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records,
                       const std::string& config_hash);

/// Summary document: {"schema", "config_hash", "rows": [...]}. Means of
/// metrics without samples are written as null.
std::string summary_json(const std::vector<SummaryRow>& rows, const std::string& config_hash,
                         int indent = 2);

}  // namespace kronsr
