#pragma once

#include "equivcheck/bayes_fit.hpp"

#include <filesystem>

namespace equivcheck {

/// A fit persisted as a directory holding draws.csv (chain, draw, one column
/// per parameter) and summary.json. Numbers are written in shortest
/// round-trip form, so load_fit_bundle(save_fit_bundle(f)) reproduces f.
void save_fit_bundle(const std::filesystem::path& dir, const PosteriorFit& fit);
PosteriorFit load_fit_bundle(const std::filesystem::path& dir);

}  // namespace equivcheck
