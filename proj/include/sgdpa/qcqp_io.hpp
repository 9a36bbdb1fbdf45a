#pragma once

#include <filesystem>
#include <string>

#include "sgdpa/problem.hpp"

namespace sgdpa {

/// QCQP instance documents (JSON):
///
///   { "n": 2, "m": 1,
///     "Q_f": [row-major n·n reals], "q_f": [n reals],
///     "constraints": [ {"Q": [n·n], "q": [n], "b": real}, ... ],
///     "simple_set": {"kind": "nonnegative_orthant" | "box" | "full_space",
///                    "lower": [...], "upper": [...]},
///     "metadata": {"start_point": [...], "generator": {...}} }
///
/// Reals are written with 17 significant digits so that reading a written
/// document restores every double bit for bit. Infinite box bounds are
/// written as the strings "inf" and "-inf".
std::string instance_to_json(const QcqpInstance& instance);
QcqpInstance instance_from_json(const std::string& text);

void write_instance(const QcqpInstance& instance, const std::filesystem::path& path);
QcqpInstance read_instance(const std::filesystem::path& path);

/// Formats a double with 17 significant digits (JSON-compatible for finite
/// values).
std::string format_real(double value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace sgdpa
