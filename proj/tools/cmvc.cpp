// cmvc: command-line front end for the cross-modal video codec.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cmvc/bitstream.hpp"
#include "cmvc/error.hpp"
#include "cmvc/eval.hpp"
#include "cmvc/hash.hpp"
#include "cmvc/pipeline.hpp"
#include "cmvc/synthetic.hpp"

namespace {

using cmvc::ErrorKind;
using json = nlohmann::json;

constexpr const char* kVersion = "1.0.0";

enum Exit { kOk = 0, kUsage = 2, kInput = 3, kBackend = 4 };

struct VideoArgs {
  std::string input;
  int width = 64;
  int height = 64;
  int planes = 1;
  std::string fps = "30/1";

  void add(CLI::App* app, bool input_required = true) {
    auto* opt = app->add_option("--input", input, "Raw planar 8-bit video file");
    if (input_required) opt->required();
    app->add_option("--width", width, "Frame width in pixels")->check(CLI::Range(1, 65535));
    app->add_option("--height", height, "Frame height in pixels")->check(CLI::Range(1, 65535));
    app->add_option("--planes", planes, "1 (luma) or 3 (planar color)")->check(CLI::IsMember({1, 3}));
    app->add_option("--fps", fps, "Frame rate as num/den or an integer");
  }

  cmvc::FrameRate rate() const {
    cmvc::FrameRate r;
    const auto slash = fps.find('/');
    try {
      if (slash == std::string::npos) {
        r.num = static_cast<std::uint32_t>(std::stoul(fps));
        r.den = 1;
      } else {
        r.num = static_cast<std::uint32_t>(std::stoul(fps.substr(0, slash)));
        r.den = static_cast<std::uint32_t>(std::stoul(fps.substr(slash + 1)));
      }
    } catch (const std::exception&) {
      cmvc::fail(ErrorKind::config, "bad --fps value '" + fps + "'");
    }
    return r;
  }

  cmvc::RawVideo load(const std::string& path) const { return cmvc::load_raw_video(path, width, height, planes, rate()); }
  cmvc::RawVideo load() const { return load(input); }
};

struct CodecArgs {
  std::string mode = "IT2V";
  std::size_t keyframes = 2;
  std::string strategy = "cosine";
  int quality = 128;
  std::string backend = "linear";
  double modulation = 0.0;
  bool optimize = false;
  std::size_t steps = 100;
  double alpha = 0.001;
  std::string text;
  std::string features;
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  void add(CLI::App* app) {
    app->add_option("--mode", mode, "TT2V or IT2V")->check(CLI::IsMember({"TT2V", "IT2V", "tt2v", "it2v"}));
    app->add_option("--keyframes", keyframes, "Number of keyframes n (>= 2)");
    app->add_option("--strategy", strategy, "cosine, mse, uniform or random")
        ->check(CLI::IsMember({"cosine", "mse", "uniform", "random"}));
    app->add_option("--quality", quality, "Keyframe quality factor")->check(CLI::IsMember({64, 128, 256}));
    app->add_option("--backend", backend, "linear, latent or external:<command>");
    app->add_option("--modulation", modulation, "Latent backend text modulation amplitude");
    app->add_flag("--optimize", optimize, "Optimize interpolation weights against the source frames");
    app->add_option("--steps", steps, "Optimizer training steps")->check(CLI::PositiveNumber);
    app->add_option("--alpha", alpha, "Optimizer learning rate")->check(CLI::PositiveNumber);
    app->add_option("--text", text, "Text sidecar with [keyframe i] / [clip j] sections");
    app->add_option("--features", features, "Per-frame feature vectors (one line per frame)");
    app->add_option("--seed", seed, "Seed for every randomized decision");
    app->add_option("--jobs", jobs, "Worker count for per-clip work")->check(CLI::PositiveNumber);
  }

  cmvc::BackendSpec backend_spec() const {
    auto spec = cmvc::BackendSpec::parse(backend);
    spec.modulation = modulation;
    return spec;
  }

  cmvc::EncodeConfig config(const cmvc::RawVideo& video) const {
    cmvc::EncodeConfig cfg;
    cfg.mode = *cmvc::parse_mode(mode);
    cfg.n_keyframes = keyframes;
    cfg.strategy = *cmvc::parse_strategy(strategy);
    cfg.quality = *cmvc::quality_from_int(quality);
    cfg.backend = backend_spec();
    cfg.seed = seed;
    cfg.jobs = jobs;
    if (optimize) {
      cmvc::OptimizerConfig opt;
      opt.training_steps = steps;
      opt.learning_rate = alpha;
      cfg.optimizer = opt;
    }
    if (!features.empty()) cfg.features = cmvc::load_feature_file(features);
    if (!text.empty()) {
      cfg.text = cmvc::TextSidecar::load(text);
    } else if (cfg.mode == cmvc::StreamMode::it2v) {
      // Without a sidecar, IT2V clips carry empty motion text.
      for (std::size_t j = 0; j + 1 < std::min(keyframes, video.frame_count()); ++j) cfg.text.clip_text[j] = "";
    }
    return cfg;
  }

  json echo() const {
    return {{"mode", mode},         {"keyframes", keyframes}, {"strategy", strategy}, {"quality", quality},
            {"backend", backend},   {"modulation", modulation}, {"optimize", optimize}, {"steps", steps},
            {"alpha", alpha},       {"text", text},           {"features", features}, {"seed", seed}};
  }
};

json number_or_inf(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

std::string hash_file(const std::string& path) {
  const auto bytes = cmvc::read_file(path);
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << cmvc::fnv1a64(std::span<const std::uint8_t>(bytes));
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) cmvc::fail(ErrorKind::malformed_input, "cannot write " + path);
  out << text;
}

/// Flat key/value CSV: header row of keys, one row of values.
std::string flatten_csv(const json& report) {
  const json flat = report.flatten();
  std::ostringstream head;
  std::ostringstream row;
  bool first = true;
  for (const auto& [key, value] : flat.items()) {
    if (!first) {
      head << ',';
      row << ',';
    }
    first = false;
    head << key.substr(1);
    if (value.is_string()) {
      row << value.get<std::string>();
    } else {
      row << value.dump();
    }
  }
  return head.str() + "\n" + row.str() + "\n";
}

std::string render_report(const json& report, const std::string& format) {
  return format == "csv" ? flatten_csv(report) : report.dump(2) + "\n";
}

class Manifest {
 public:
  explicit Manifest(std::string command) : start_(std::chrono::steady_clock::now()) {
    doc_["tool"] = "cmvc";
    doc_["version"] = kVersion;
    doc_["command"] = std::move(command);
    doc_["inputs"] = json::object();
    doc_["outputs"] = json::array();
  }
  void config(json c) { doc_["config"] = std::move(c); }
  void input(const std::string& path) {
    if (!path.empty()) doc_["inputs"][path] = hash_file(path);
  }
  void output(const std::string& path) { doc_["outputs"].push_back(path); }
  void write(const std::string& out_path) {
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    doc_["timings_ms"] = {{"total", ms}};
    write_text(out_path + ".manifest.json", doc_.dump(2) + "\n");
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

json rate_json(const cmvc::RateBreakdown& r) {
  return {{"keyframe_bits", r.keyframe_bits},
          {"motion_bits", r.motion_bits},
          {"weight_bits", r.weight_bits},
          {"header_bits", r.header_bits},
          {"total_bits", r.total_bits}};
}

int run(int argc, char** argv) {
  CLI::App app{"Cross-modal video codec: keyframes + motion text + interpolation weights"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  VideoArgs video;
  CodecArgs codec;
  std::string out;
  std::string report_format = "json";

  // encode
  auto* encode = app.add_subcommand("encode", "Encode a raw video into a .cmvc stream");
  video.add(encode);
  codec.add(encode);
  std::string trace_path;
  encode->add_option("--out", out, "Output stream path")->required();
  encode->add_option("--trace", trace_path, "Optimizer trace CSV (frame,step,wi,wl,loss)");
  encode->add_option("--report", report_format, "Report format on stdout")->check(CLI::IsMember({"json", "csv"}));

  // decode
  auto* decode = app.add_subcommand("decode", "Decode a .cmvc stream into a raw video");
  std::string stream_in;
  decode->add_option("--input", stream_in, "Input stream")->required();
  decode->add_option("--backend", codec.backend, "linear, latent or external:<command>");
  decode->add_option("--modulation", codec.modulation, "Latent backend text modulation amplitude");
  decode->add_option("--jobs", codec.jobs, "Worker count")->check(CLI::PositiveNumber);
  decode->add_option("--out", out, "Output raw video path")->required();
  decode->add_option("--report", report_format, "Report format on stdout")->check(CLI::IsMember({"json", "csv"}));

  // keyframes
  auto* keyframes = app.add_subcommand("keyframes", "Print the selected keyframe indices");
  video.add(keyframes);
  keyframes->add_option("--keyframes", codec.keyframes, "Number of keyframes n (>= 2)");
  keyframes->add_option("--strategy", codec.strategy, "cosine, mse, uniform or random")
      ->check(CLI::IsMember({"cosine", "mse", "uniform", "random"}));
  keyframes->add_option("--features", codec.features, "Per-frame feature vectors");
  keyframes->add_option("--seed", codec.seed, "Seed for the random strategy");
  keyframes->add_option("--out", out, "Also write the indices to this file");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Compare a decoded video with its reference");
  video.add(evaluate);
  std::string reference;
  std::string stream_path;
  std::string metrics_csv;
  std::string video_id;
  evaluate->add_option("--reference", reference, "Reference raw video")->required();
  evaluate->add_option("--stream", stream_path, "Stream used for the rate (bits per pixel)");
  evaluate->add_option("--metrics", metrics_csv, "External metrics CSV (video_id,metric_name,value)");
  evaluate->add_option("--video-id", video_id, "Row key into --metrics");
  evaluate->add_option("--out", out, "Report path (stdout when omitted)");
  evaluate->add_option("--report", report_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  // bdrate
  auto* bdrate = app.add_subcommand("bdrate", "Bjontegaard delta rate between two R-D curves");
  std::string anchor_csv;
  std::string test_csv;
  bdrate->add_option("--anchor", anchor_csv, "Anchor curve CSV (rate_bpp,distortion)")->required();
  bdrate->add_option("--test", test_csv, "Test curve CSV (rate_bpp,distortion)")->required();
  bdrate->add_option("--out", out, "Also write a JSON report here");

  // roundtrip
  auto* roundtrip = app.add_subcommand("roundtrip", "Encode, decode and evaluate in one go; emits an R-D point");
  video.add(roundtrip);
  codec.add(roundtrip);
  std::string decoded_out;
  roundtrip->add_option("--out", out, "Report path; the stream is written to <out>.cmvc")->required();
  roundtrip->add_option("--decoded", decoded_out, "Also write the decoded video here");
  roundtrip->add_option("--report", report_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic blend video (raw planar)");
  cmvc::SyntheticSpec synth_spec;
  synth->add_option("--width", synth_spec.width)->check(CLI::Range(1, 65535));
  synth->add_option("--height", synth_spec.height)->check(CLI::Range(1, 65535));
  synth->add_option("--planes", synth_spec.planes)->check(CLI::IsMember({1, 3}));
  synth->add_option("--frames", synth_spec.frames)->check(CLI::Range(2, 65535));
  synth->add_option("--segment", synth_spec.segment)->check(CLI::PositiveNumber);
  synth->add_option("--gamma", synth_spec.gamma)->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_spec.seed);
  synth->add_option("--out", out, "Output raw video path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*encode) {
    Manifest manifest("encode");
    const auto v = video.load();
    const auto cfg = codec.config(v);
    const auto result = cmvc::encode_detailed(v, cfg);
    cmvc::write_file(out, result.stream);
    if (!trace_path.empty()) {
      std::vector<cmvc::TraceRow> rows;
      for (const auto& o : result.optimization) rows.insert(rows.end(), o.trace.begin(), o.trace.end());
      cmvc::write_trace_csv(trace_path, rows);
      manifest.output(trace_path);
    }
    json report = {{"keyframes", result.keyframes.indices},
                   {"clips", result.clips.size()},
                   {"bytes", result.stream.size()},
                   {"bpp", cmvc::compute_bpp(result.rate.total_bits, v)},
                   {"rate", rate_json(result.rate)}};
    std::cout << render_report(report, report_format);
    json echo = codec.echo();
    echo["width"] = video.width;
    echo["height"] = video.height;
    echo["planes"] = video.planes;
    echo["fps"] = video.fps;
    manifest.config(echo);
    manifest.input(video.input);
    manifest.input(codec.text);
    manifest.output(out);
    manifest.write(out);
    return kOk;
  }

  if (*decode) {
    Manifest manifest("decode");
    const auto bytes = cmvc::read_file(stream_in);
    const auto v = cmvc::decode(bytes, codec.backend_spec(), codec.jobs);
    cmvc::write_raw_video(out, v);
    json report = {{"width", v.width()},
                   {"height", v.height()},
                   {"planes", v.planes()},
                   {"frames", v.frame_count()},
                   {"fps", std::to_string(v.frame_rate().num) + "/" + std::to_string(v.frame_rate().den)}};
    std::cout << render_report(report, report_format);
    manifest.config({{"backend", codec.backend}, {"modulation", codec.modulation}});
    manifest.input(stream_in);
    manifest.output(out);
    manifest.write(out);
    return kOk;
  }

  if (*keyframes) {
    const auto v = video.load();
    std::vector<cmvc::FeatureVector> feats;
    if (!codec.features.empty()) feats = cmvc::load_feature_file(codec.features);
    const auto set = cmvc::select_keyframes(v, codec.keyframes, *cmvc::parse_strategy(codec.strategy), codec.seed, feats);
    std::ostringstream line;
    for (std::size_t i = 0; i < set.indices.size(); ++i) line << (i ? "," : "") << set.indices[i];
    std::cout << line.str() << "\n";
    if (!out.empty()) {
      Manifest manifest("keyframes");
      write_text(out, line.str() + "\n");
      manifest.config({{"keyframes", codec.keyframes}, {"strategy", codec.strategy}, {"seed", codec.seed}});
      manifest.input(video.input);
      manifest.output(out);
      manifest.write(out);
    }
    return kOk;
  }

  if (*evaluate) {
    const auto decoded = video.load();
    const auto ref = video.load(reference);
    json report = {{"psnr", number_or_inf(cmvc::psnr(decoded, ref))},
                   {"mse", cmvc::mse(decoded, ref)},
                   {"flicker", cmvc::temporal_flicker(decoded)},
                   {"flicker_reference", cmvc::temporal_flicker(ref)}};
    if (!stream_path.empty()) {
      const auto bytes = cmvc::read_file(stream_path);
      report["bits"] = 8 * bytes.size();
      report["bpp"] = cmvc::compute_bpp(8 * bytes.size(), ref);
    }
    if (!metrics_csv.empty()) {
      const auto table = cmvc::load_metric_csv(metrics_csv);
      json external = json::object();
      for (const auto& [key, value] : table) {
        if (video_id.empty() || key.first == video_id) external[key.first][key.second] = value;
      }
      report["external_metrics"] = external;
    }
    const auto text = render_report(report, report_format);
    if (out.empty()) {
      std::cout << text;
    } else {
      Manifest manifest("evaluate");
      write_text(out, text);
      manifest.input(video.input);
      manifest.input(reference);
      manifest.input(stream_path);
      manifest.input(metrics_csv);
      manifest.output(out);
      manifest.write(out);
    }
    return kOk;
  }

  if (*bdrate) {
    const auto a = cmvc::load_curve_csv(anchor_csv);
    const auto t = cmvc::load_curve_csv(test_csv);
    const double value = cmvc::bd_rate(a, t);
    std::cout << std::fixed << std::setprecision(4) << (value == 0.0 ? 0.0 : value) << "\n";
    if (!out.empty()) {
      Manifest manifest("bdrate");
      auto curve_json = [](const cmvc::RdCurve& c) {
        json pts = json::array();
        for (const auto& p : c.points) pts.push_back({{"rate_bpp", p.rate}, {"distortion", p.distortion}});
        return pts;
      };
      json report = {{"bd_rate_percent", value},
                     {"curves", {{"anchor", curve_json(a)}, {"test", curve_json(t)}}},
                     {"matrix", {{"anchor", {{"anchor", 0.0}, {"test", value}}},
                                 {"test", {{"anchor", cmvc::bd_rate(t, a)}, {"test", 0.0}}}}}};
      write_text(out, report.dump(2) + "\n");
      manifest.input(anchor_csv);
      manifest.input(test_csv);
      manifest.output(out);
      manifest.write(out);
    }
    return kOk;
  }

  if (*roundtrip) {
    Manifest manifest("roundtrip");
    const auto v = video.load();
    const auto cfg = codec.config(v);
    const auto encoded = cmvc::encode_detailed(v, cfg);
    const auto decoded = cmvc::decode(encoded.stream, cfg.backend, cfg.jobs);
    const std::string stream_out = out + ".cmvc";
    cmvc::write_file(stream_out, encoded.stream);
    if (!decoded_out.empty()) {
      cmvc::write_raw_video(decoded_out, decoded);
      manifest.output(decoded_out);
    }
    const double bpp = cmvc::compute_bpp(encoded.rate.total_bits, v);
    const double p = cmvc::psnr(decoded, v);
    json report = {{"bpp", bpp},
                   {"psnr", number_or_inf(p)},
                   {"mse", cmvc::mse(decoded, v)},
                   {"flicker", cmvc::temporal_flicker(decoded)},
                   {"rd_point", {{"rate", bpp}, {"distortion", number_or_inf(p)}, {"metric_name", "psnr"}, {"higher_better", true}}},
                   {"keyframes", encoded.keyframes.indices},
                   {"rate", rate_json(encoded.rate)},
                   {"config", codec.echo()}};
    write_text(out, render_report(report, report_format));
    manifest.config(codec.echo());
    manifest.input(video.input);
    manifest.input(codec.text);
    manifest.output(out);
    manifest.output(stream_out);
    manifest.write(out);
    return kOk;
  }

  if (*synth) {
    cmvc::write_raw_video(out, cmvc::make_synthetic_video(synth_spec));
    return kOk;
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const cmvc::Error& e) {
    std::cerr << "cmvc: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::backend_unavailable:
      case ErrorKind::protocol_violation: return kBackend;
      default: return kInput;
    }
  } catch (const std::exception& e) {
    std::cerr << "cmvc: " << e.what() << "\n";
    return kInput;
  }
}
