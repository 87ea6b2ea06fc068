#include "vocovar/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vocovar/errors.hpp"

namespace vocovar {

namespace {

constexpr const char* kHeaderPrefix = "vocovar-dataset";
constexpr const char* kVersion = "v1";

std::string fmt_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void fail_parse(int line, const std::string& msg) {
  std::ostringstream os;
  os << "line " << line << ": " << msg;
  throw ParseError(os.str(), line);
}

double parse_double(const std::string& tok, int line, const char* field) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    fail_parse(line, std::string("field '") + field + "': expected a number, got '" + tok + "'");
  }
  if (pos != tok.size()) {
    fail_parse(line, std::string("field '") + field + "': trailing characters in '" + tok + "'");
  }
  return v;
}

int parse_int(const std::string& tok, int line, const char* field) {
  size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(tok, &pos);
  } catch (const std::exception&) {
    fail_parse(line, std::string("field '") + field + "': expected an integer, got '" + tok + "'");
  }
  if (pos != tok.size()) {
    fail_parse(line, std::string("field '") + field + "': trailing characters in '" + tok + "'");
  }
  return static_cast<int>(v);
}

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream is(line);
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

[[noreturn]] void fail_validate(const std::string& msg) {
  throw ValidationError(msg);
}

}  // namespace

void validate(const KeyframeDataset& ds) {
  const auto& K = ds.intrinsics;
  if (!(K.fx > 0) || !(K.fy > 0)) fail_validate("intrinsics: focal lengths must be positive");
  if (!(K.cx > 0 && K.cx < K.width) || !(K.cy > 0 && K.cy < K.height)) {
    fail_validate("intrinsics: principal point must lie inside the image");
  }
  if (!(ds.meta.pixel_scale > 0)) fail_validate("meta: pixel_scale must be positive");

  const int n = static_cast<int>(ds.keyframes.size());
  for (int k = 0; k < n; ++k) {
    if (ds.keyframes[k].id != k) {
      std::ostringstream os;
      os << "keyframe ids must be dense 0.." << n - 1 << "; position " << k
         << " holds id " << ds.keyframes[k].id;
      fail_validate(os.str());
    }
    const auto& kf = ds.keyframes[k];
    for (size_t s = 0; s < kf.samples.size(); ++s) {
      const auto& ps = kf.samples[s];
      if (!ps.pixel.allFinite()) {
        std::ostringstream os;
        os << "sample " << s << " of keyframe " << k << ": pixel not finite";
        fail_validate(os.str());
      }
      if (!in_frame(K, ps.pixel)) {
        std::ostringstream os;
        os << "sample " << s << " of keyframe " << k << ": pixel ("
           << ps.pixel.x() << ", " << ps.pixel.y() << ") outside the image";
        fail_validate(os.str());
      }
      if (!(ps.inv_depth > 0)) {
        std::ostringstream os;
        os << "sample " << s << " of keyframe " << k
           << ": inverse depth must be positive, got " << ps.inv_depth;
        fail_validate(os.str());
      }
    }
  }

  for (size_t m = 0; m < ds.measurements.size(); ++m) {
    const auto& mm = ds.measurements[m];
    std::ostringstream who;
    who << "measurement " << m << " (" << mm.frame_i << " -> " << mm.frame_j
        << ", sample " << mm.sample_index << ")";
    if (mm.frame_i < 0 || mm.frame_i >= n || mm.frame_j < 0 || mm.frame_j >= n) {
      fail_validate(who.str() + ": references a keyframe that does not exist");
    }
    if (mm.frame_i == mm.frame_j) {
      fail_validate(who.str() + ": frames i and j must differ");
    }
    if (mm.sample_index < 0 ||
        mm.sample_index >=
            static_cast<int>(ds.keyframes[mm.frame_i].samples.size())) {
      fail_validate(who.str() + ": sample index out of range");
    }
    if (!mm.target.allFinite()) {
      fail_validate(who.str() + ": target pixel not finite");
    }
    if (mm.sigma) {
      const Mat2& s = *mm.sigma;
      const bool spd = s(0, 0) > 0 && s(1, 1) > 0 &&
                       s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0) > 0 &&
                       std::abs(s(0, 1) - s(1, 0)) < 1e-15;
      if (!spd) fail_validate(who.str() + ": sigma is not symmetric positive definite");
    }
  }
}

KeyframeDataset parse_dataset(const std::string& text) {
  KeyframeDataset ds;
  bool have_header = false;
  bool have_intrinsics = false;
  std::vector<Keyframe> frames;

  std::istringstream is(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const auto toks = tokenize(raw);
    if (toks.empty()) continue;

    if (!have_header) {
      if (toks.size() != 2 || toks[0] != kHeaderPrefix) {
        fail_parse(line_no, "expected header 'vocovar-dataset v1'");
      }
      if (toks[1] != kVersion) {
        throw ValidationError("unsupported schema version '" + toks[1] +
                              "' (line 1); this reader understands v1");
      }
      have_header = true;
      continue;
    }

    const std::string& kind = toks[0];
    if (kind == "meta") {
      if (toks.size() != 3) fail_parse(line_no, "meta record needs: meta pixel_scale source");
      ds.meta.pixel_scale = parse_double(toks[1], line_no, "pixel_scale");
      ds.meta.source = toks[2];
    } else if (kind == "K") {
      if (toks.size() != 7) fail_parse(line_no, "K record needs: K fx fy cx cy w h");
      if (have_intrinsics) fail_parse(line_no, "duplicate K record");
      ds.intrinsics.fx = parse_double(toks[1], line_no, "fx");
      ds.intrinsics.fy = parse_double(toks[2], line_no, "fy");
      ds.intrinsics.cx = parse_double(toks[3], line_no, "cx");
      ds.intrinsics.cy = parse_double(toks[4], line_no, "cy");
      ds.intrinsics.width = parse_int(toks[5], line_no, "w");
      ds.intrinsics.height = parse_int(toks[6], line_no, "h");
      have_intrinsics = true;
    } else if (kind == "F") {
      if (toks.size() != 9) fail_parse(line_no, "F record needs: F id qw qx qy qz tx ty tz");
      Keyframe kf;
      kf.id = parse_int(toks[1], line_no, "id");
      std::array<double, 7> q;
      static const char* names[] = {"qw", "qx", "qy", "qz", "tx", "ty", "tz"};
      for (int k = 0; k < 7; ++k) q[k] = parse_double(toks[2 + k], line_no, names[k]);
      const double qnorm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
      if (qnorm < 1e-12) fail_parse(line_no, "quaternion has zero norm");
      kf.pose = pose_from_array(q);
      frames.push_back(std::move(kf));
    } else if (kind == "S") {
      if (toks.size() != 5) fail_parse(line_no, "S record needs: S frame u v d");
      const int frame = parse_int(toks[1], line_no, "frame");
      PixelSample ps;
      ps.pixel.x() = parse_double(toks[2], line_no, "u");
      ps.pixel.y() = parse_double(toks[3], line_no, "v");
      ps.inv_depth = parse_double(toks[4], line_no, "d");
      auto it = std::find_if(frames.begin(), frames.end(),
                             [frame](const Keyframe& kf) { return kf.id == frame; });
      if (it == frames.end()) {
        fail_parse(line_no, "S record references keyframe " + std::to_string(frame) +
                                " before its F record");
      }
      it->samples.push_back(ps);
    } else if (kind == "M") {
      if (toks.size() != 6 && toks.size() != 9) {
        fail_parse(line_no, "M record needs: M i j sample_idx u* v* [s11 s12 s22]");
      }
      FlowMeasurement m;
      m.frame_i = parse_int(toks[1], line_no, "i");
      m.frame_j = parse_int(toks[2], line_no, "j");
      m.sample_index = parse_int(toks[3], line_no, "sample_idx");
      m.target.x() = parse_double(toks[4], line_no, "u*");
      m.target.y() = parse_double(toks[5], line_no, "v*");
      if (toks.size() == 9) {
        Mat2 s;
        s(0, 0) = parse_double(toks[6], line_no, "s11");
        s(0, 1) = s(1, 0) = parse_double(toks[7], line_no, "s12");
        s(1, 1) = parse_double(toks[8], line_no, "s22");
        m.sigma = s;
      }
      ds.measurements.push_back(m);
    } else {
      fail_parse(line_no, "unknown record type '" + kind + "'");
    }
  }

  if (!have_header) throw ParseError("empty file: missing 'vocovar-dataset v1' header", 0);
  if (!have_intrinsics) fail_validate("missing K (intrinsics) record");

  std::sort(frames.begin(), frames.end(),
            [](const Keyframe& a, const Keyframe& b) { return a.id < b.id; });
  ds.keyframes = std::move(frames);
  validate(ds);
  return ds;
}

KeyframeDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str());
}

std::string serialize_dataset(const KeyframeDataset& ds) {
  std::ostringstream os;
  os << kHeaderPrefix << ' ' << kVersion << '\n';
  os << "meta " << fmt_g17(ds.meta.pixel_scale) << ' ' << ds.meta.source << '\n';
  const auto& K = ds.intrinsics;
  os << "K " << fmt_g17(K.fx) << ' ' << fmt_g17(K.fy) << ' ' << fmt_g17(K.cx)
     << ' ' << fmt_g17(K.cy) << ' ' << K.width << ' ' << K.height << '\n';
  for (const auto& kf : ds.keyframes) {
    const auto q = pose_to_array(kf.pose);
    os << "F " << kf.id;
    for (double v : q) os << ' ' << fmt_g17(v);
    os << '\n';
  }
  for (const auto& kf : ds.keyframes) {
    for (const auto& s : kf.samples) {
      os << "S " << kf.id << ' ' << fmt_g17(s.pixel.x()) << ' '
         << fmt_g17(s.pixel.y()) << ' ' << fmt_g17(s.inv_depth) << '\n';
    }
  }
  for (const auto& m : ds.measurements) {
    os << "M " << m.frame_i << ' ' << m.frame_j << ' ' << m.sample_index << ' '
       << fmt_g17(m.target.x()) << ' ' << fmt_g17(m.target.y());
    if (m.sigma) {
      os << ' ' << fmt_g17((*m.sigma)(0, 0)) << ' ' << fmt_g17((*m.sigma)(0, 1))
         << ' ' << fmt_g17((*m.sigma)(1, 1));
    }
    os << '\n';
  }
  return os.str();
}

void save_dataset(const std::filesystem::path& path, const KeyframeDataset& ds) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset file: " + path.string());
  out << serialize_dataset(ds);
  if (!out) throw IoError("write failed: " + path.string());
}

KeyframeDataset prefix_window(const KeyframeDataset& ds, int count) {
  KeyframeDataset out;
  out.intrinsics = ds.intrinsics;
  out.meta = ds.meta;
  const int n = std::min<int>(count, static_cast<int>(ds.keyframes.size()));
  out.keyframes.assign(ds.keyframes.begin(), ds.keyframes.begin() + n);
  for (const auto& m : ds.measurements) {
    if (m.frame_i < n && m.frame_j < n) out.measurements.push_back(m);
  }
  return out;
}

int sample_global_index(const KeyframeDataset& ds, int frame, int sample_index) {
  int base = 0;
  for (int k = 0; k < frame; ++k) {
    base += static_cast<int>(ds.keyframes[k].samples.size());
  }
  return base + sample_index;
}

}  // namespace vocovar
