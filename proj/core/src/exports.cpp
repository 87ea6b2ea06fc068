#include "vocovar/exports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vocovar/errors.hpp"

namespace vocovar {

namespace {

std::string fmt_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string poses_csv(const Values& values) {
  std::ostringstream os;
  os << "keyframe,qw,qx,qy,qz,tx,ty,tz\n";
  for (const auto& [id, pose] : values.poses) {
    os << id;
    for (double v : pose_to_array(pose)) os << ',' << fmt_g17(v);
    os << '\n';
  }
  return os.str();
}

std::string marginals_csv(const std::vector<MarginalBlock>& blocks) {
  std::ostringstream os;
  os << "keyframe";
  for (int r = 0; r < 6; ++r) {
    for (int c = r; c < 6; ++c) os << ",cov" << r << c;
  }
  os << ",logdet\n";
  for (const auto& b : blocks) {
    if (b.variable.kind != VarKind::Pose) continue;
    os << b.variable.id;
    for (int r = 0; r < 6; ++r) {
      for (int c = r; c < 6; ++c) os << ',' << fmt_g17(b.cov(r, c));
    }
    os << ',' << fmt_g17(dopt(b.cov)) << '\n';
  }
  return os.str();
}

std::string trend_csv(const TrendSeries& series) {
  std::ostringstream os;
  os << "keyframe,logdet,num_edges,max_backlink_span\n";
  for (const auto& p : series.points) {
    os << p.keyframe << ',' << fmt_g17(p.dopt) << ',' << p.num_edges << ','
       << p.max_backlink_span << '\n';
  }
  return os.str();
}

std::string covis_csv(const CovisibilityGraph& cg) {
  std::ostringstream os;
  for (int i = 0; i < cg.n; ++i) {
    for (int j = 0; j < cg.n; ++j) {
      if (j) os << ',';
      os << cg.adjacency(i, j);
    }
    os << '\n';
  }
  return os.str();
}

std::string trend_svg(const TrendSeries& series) {
  // Layout: 520x360 trend plot, 360x360 heat map, shared 40 px margins.
  const double W = 980, H = 440, margin = 50;
  const double plot_w = 470, plot_h = H - 2 * margin;
  const double map_x = margin + plot_w + 60;
  const double map_size = plot_h;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";

  if (!series.points.empty()) {
    double lo = series.points.front().dopt, hi = lo;
    int kmin = series.points.front().keyframe, kmax = kmin;
    for (const auto& p : series.points) {
      lo = std::min(lo, p.dopt);
      hi = std::max(hi, p.dopt);
      kmin = std::min(kmin, p.keyframe);
      kmax = std::max(kmax, p.keyframe);
    }
    if (hi - lo < 1e-12) hi = lo + 1.0;
    const double kspan = std::max(1, kmax - kmin);

    auto px = [&](int k) { return margin + plot_w * (k - kmin) / kspan; };
    auto py = [&](double d) {
      return margin + plot_h * (1.0 - (d - lo) / (hi - lo));
    };

    os << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\""
       << plot_w << "\" height=\"" << plot_h
       << "\" fill=\"none\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << margin << "\" y=\"" << margin - 14
       << "\" font-family=\"sans-serif\" font-size=\"14\">pose marginal "
          "log det vs keyframe</text>\n";
    os << "<text x=\"" << margin << "\" y=\"" << H - 12
       << "\" font-family=\"sans-serif\" font-size=\"12\">keyframe " << kmin
       << " .. " << kmax << ", logdet " << fmt_f2(lo) << " .. " << fmt_f2(hi)
       << "</text>\n";

    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" "
          "points=\"";
    for (const auto& p : series.points) {
      os << fmt_f2(px(p.keyframe)) << ',' << fmt_f2(py(p.dopt)) << ' ';
    }
    os << "\"/>\n";
    for (const auto& p : series.points) {
      const bool closes_loop = p.max_backlink_span > 1 && p.num_edges > 0;
      os << "<circle cx=\"" << fmt_f2(px(p.keyframe)) << "\" cy=\""
         << fmt_f2(py(p.dopt)) << "\" r=\"3\" fill=\""
         << (closes_loop ? "#d62728" : "#1f77b4") << "\"/>\n";
    }
  }

  if (!series.adjacency_steps.empty()) {
    const Eigen::MatrixXi& adj = series.adjacency_steps.back();
    const int n = static_cast<int>(adj.rows());
    int peak = 1;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) peak = std::max(peak, adj(i, j) + adj(j, i));
    }
    const double cell = map_size / std::max(1, n);
    os << "<text x=\"" << map_x << "\" y=\"" << margin - 14
       << "\" font-family=\"sans-serif\" font-size=\"14\">co-visibility "
          "adjacency (upper triangle)</text>\n";
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const int count = adj(i, j) + adj(j, i);
        if (count == 0) continue;
        const int shade =
            255 - static_cast<int>(215.0 * count / peak) - 40;
        os << "<rect x=\"" << fmt_f2(map_x + j * cell) << "\" y=\""
           << fmt_f2(margin + i * cell) << "\" width=\"" << fmt_f2(cell)
           << "\" height=\"" << fmt_f2(cell) << "\" fill=\"rgb(" << shade
           << ',' << shade << ",255)\"/>\n";
      }
    }
    os << "<rect x=\"" << map_x << "\" y=\"" << margin << "\" width=\""
       << map_size << "\" height=\"" << map_size
       << "\" fill=\"none\" stroke=\"#444\"/>\n";
  }

  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace vocovar
