// CSV and SVG export of solver results. All writers are deterministic:
// identical inputs produce byte-identical files.

#ifndef VOCOVAR_EXPORTS_HPP
#define VOCOVAR_EXPORTS_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "vocovar/analysis.hpp"
#include "vocovar/graph.hpp"
#include "vocovar/marginals.hpp"

namespace vocovar {

// Header: keyframe,qw,qx,qy,qz,tx,ty,tz
std::string poses_csv(const Values& values);

// Header: keyframe,cov00,...,cov55,logdet -- the 21 upper-triangular
// entries of each 6x6 pose marginal in row-major upper order, then its
// log determinant.
std::string marginals_csv(const std::vector<MarginalBlock>& blocks);

// Header: keyframe,logdet,num_edges,max_backlink_span
std::string trend_csv(const TrendSeries& series);

// One row of comma-separated counts per keyframe, no header.
std::string covis_csv(const CovisibilityGraph& cg);

// Standalone SVG: dopt trend polyline on the left, co-visibility
// adjacency heat map on the right.
std::string trend_svg(const TrendSeries& series);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace vocovar

#endif  // VOCOVAR_EXPORTS_HPP
