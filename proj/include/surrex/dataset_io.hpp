#pragma once

#include <string>
#include <vector>

#include "surrex/types.hpp"

namespace surrex {

/// Load a study CSV. Required header:
///   study_id,class_id,y1,se1,y2,se2,rho_w
/// Row order is preserved; classes are indexed in first-appearance order.
/// Any invariant violation (non-finite value, se <= 0, |rho_w| >= 1,
/// duplicate study_id, missing column) raises ParseError naming the data row
/// (1-based, header excluded) and column.
Dataset load_dataset(const std::string& path);

/// Write the CSV form of a dataset. Values are emitted in shortest
/// round-trip decimal form, so load(write(d)) reproduces every field exactly.
void write_dataset(const std::string& path, const Dataset& data);
std::string dataset_to_csv(const Dataset& data);

/// Non-throwing invariant check; empty result means the dataset is valid.
std::vector<Violation> validate(const Dataset& data);

/// Stable 64-bit FNV-1a fingerprint of the canonical CSV serialization,
/// as a hex string.
std::string dataset_fingerprint(const Dataset& data);

/// Shortest round-trip decimal rendering of a double (locale independent).
std::string format_double(double x);

} // namespace surrex
