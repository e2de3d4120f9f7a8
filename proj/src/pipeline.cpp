#include "cmvc/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "cmvc/error.hpp"

namespace cmvc {

// ---- sidecar -----------------------------------------------------------------

TextSidecar TextSidecar::parse(std::string_view text) {
  static const std::regex header(R"(^\s*\[(keyframe|clip)\s+(\d+)\]\s*$)");
  TextSidecar out;
  std::string* current = nullptr;
  std::vector<std::string*> sections;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (std::regex_match(line, m, header)) {
      const std::size_t idx = std::stoul(m[2].str());
      auto& target = m[1].str() == "keyframe" ? out.keyframe_text : out.clip_text;
      if (target.contains(idx)) fail(ErrorKind::config, "duplicate sidecar section at line " + std::to_string(line_no));
      current = &target[idx];
      sections.push_back(current);
      continue;
    }
    if (!current) {
      if (line.find_first_not_of(" \t") != std::string::npos) {
        fail(ErrorKind::config, "sidecar text before the first section header at line " + std::to_string(line_no));
      }
      continue;
    }
    if (!current->empty() || !line.empty()) {
      if (!current->empty()) current->push_back('\n');
      current->append(line);
    }
  }
  for (auto* s : sections) {
    while (!s->empty() && (s->back() == '\n' || s->back() == ' ' || s->back() == '\t')) s->pop_back();
    if (!is_valid_utf8(*s)) fail(ErrorKind::config, "sidecar text is not valid UTF-8");
  }
  return out;
}

TextSidecar TextSidecar::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::config, "cannot open text sidecar " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

// ---- helpers -----------------------------------------------------------------

namespace {

/// Runs fn(backend, item) for every item, spreading items over `jobs` workers
/// that each own a backend instance. The exception of the lowest failing item
/// is rethrown so failures are reported deterministically.
template <typename Fn>
void for_each_item(std::size_t items, unsigned jobs, const BackendSpec* spec, Fn&& fn) {
  const unsigned workers = static_cast<unsigned>(std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(items, 1)));
  std::vector<std::exception_ptr> errors(items);
  auto run = [&](unsigned w) {
    std::unique_ptr<GenerationBackend> backend;
    for (std::size_t i = w; i < items; i += workers) {
      try {
        if (spec && !backend) backend = make_backend(*spec);
        fn(backend.get(), i);
      } catch (...) {
        errors[i] = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

const std::string& required_text(const std::map<std::size_t, std::string>& texts, std::size_t idx, const char* what) {
  const auto it = texts.find(idx);
  if (it == texts.end()) fail(ErrorKind::config, std::string("missing sidecar text for ") + what + " " + std::to_string(idx));
  return it->second;
}

StreamHeader header_for(const RawVideo& video, StreamMode mode, std::size_t clips) {
  require(video.width() <= 0xffff && video.height() <= 0xffff, "frame dimensions exceed 16 bits");
  require(video.frame_count() <= 0xffff, "frame count exceeds 16 bits");
  require(video.frame_rate().num <= 0xffff && video.frame_rate().den <= 0xffff, "frame rate terms exceed 16 bits");
  require(clips <= 0xffff, "clip count exceeds 16 bits");
  StreamHeader h;
  h.mode = mode;
  h.width = static_cast<std::uint16_t>(video.width());
  h.height = static_cast<std::uint16_t>(video.height());
  h.planes = static_cast<std::uint8_t>(video.planes());
  h.frame_count = static_cast<std::uint16_t>(video.frame_count());
  h.frame_rate_num = static_cast<std::uint16_t>(video.frame_rate().num);
  h.frame_rate_den = static_cast<std::uint16_t>(video.frame_rate().den);
  h.clip_count = static_cast<std::uint16_t>(clips);
  return h;
}

}  // namespace

// ---- encode ------------------------------------------------------------------

EncodeOutcome encode_detailed(const RawVideo& video, const EncodeConfig& cfg) {
  if (cfg.optimizer) cfg.optimizer->validate();
  EncodeOutcome out;
  out.keyframes = select_keyframes(video, cfg.n_keyframes, cfg.strategy, cfg.seed, cfg.features);
  out.clips = split_into_clips(video, out.keyframes);
  const std::size_t n = out.keyframes.size();
  const std::size_t clip_count = out.clips.size();

  // Validate all text up front so a config error never leaves partial work.
  for (std::size_t j = 0; j < clip_count; ++j) required_text(cfg.text.clip_text, j, "clip");
  if (cfg.mode == StreamMode::tt2v) {
    for (std::size_t k = 0; k < n; ++k) required_text(cfg.text.keyframe_text, k, "keyframe");
  }

  std::vector<ClipRecord> records(clip_count);
  for (std::size_t j = 0; j < clip_count; ++j) {
    records[j].start_index = static_cast<std::uint16_t>(out.clips[j].start_index);
    records[j].end_index = static_cast<std::uint16_t>(out.clips[j].end_index);
  }

  if (cfg.mode == StreamMode::tt2v) {
    for (std::size_t j = 0; j < clip_count; ++j) {
      auto& rec = records[j];
      rec.sections.push_back({SectionTag::ktxt, encode_text(required_text(cfg.text.keyframe_text, j, "keyframe"))});
      if (j + 1 == clip_count) {
        rec.sections.push_back(
            {SectionTag::ktxt, encode_text(required_text(cfg.text.keyframe_text, j + 1, "keyframe"))});
      }
      rec.sections.push_back({SectionTag::mtxt, encode_text(cfg.text.clip_text.at(j))});
    }
  } else {
    std::vector<std::vector<std::uint8_t>> kimg(n);
    std::vector<Frame> decoded(n);
    for_each_item(n, cfg.jobs, nullptr, [&](GenerationBackend*, std::size_t k) {
      kimg[k] = encode_keyframe(video.frame(out.keyframes.indices[k]), cfg.quality);
      decoded[k] = decode_keyframe(kimg[k]);
    });

    if (cfg.optimizer) out.optimization.resize(clip_count);
    std::vector<std::vector<std::uint8_t>> weights(clip_count);
    if (cfg.optimizer) {
      for_each_item(clip_count, cfg.jobs, &cfg.backend, [&](GenerationBackend* backend, std::size_t j) {
        const auto& span = out.clips[j];
        std::vector<Frame> targets;
        for (std::size_t f = span.start_index + 1; f < span.end_index; ++f) targets.push_back(video.frame(f));
        out.optimization[j] = optimize_weights(*backend, decoded[j], decoded[j + 1], std::span<const Frame>(targets),
                                               *cfg.optimizer, cfg.text.clip_text.at(j));
        weights[j] = encode_weights(out.optimization[j].weights);
      });
    }

    for (std::size_t j = 0; j < clip_count; ++j) {
      auto& rec = records[j];
      rec.sections.push_back({SectionTag::kimg, std::move(kimg[j])});
      if (j + 1 == clip_count) rec.sections.push_back({SectionTag::kimg, std::move(kimg[j + 1])});
      rec.sections.push_back({SectionTag::mtxt, encode_text(cfg.text.clip_text.at(j))});
      if (cfg.optimizer) rec.sections.push_back({SectionTag::wgts, std::move(weights[j])});
    }
  }

  const auto header = header_for(video, cfg.mode, clip_count);
  out.stream = mux(header, records);
  out.rate = rate_breakdown(header, records);
  return out;
}

std::vector<std::uint8_t> encode(const RawVideo& video, const EncodeConfig& cfg) {
  return encode_detailed(video, cfg).stream;
}

// ---- decode ------------------------------------------------------------------

RawVideo decode(std::span<const std::uint8_t> bytes, const BackendSpec& backend, unsigned jobs) {
  const Stream stream = demux(bytes);
  const auto& h = stream.header;
  const std::size_t clip_count = stream.clips.size();
  const std::size_t n = clip_count + 1;
  const int w = h.width;
  const int ht = h.height;
  const int planes = h.planes;

  std::vector<Frame> frames(h.frame_count);
  std::vector<Frame> keyframes(n);
  std::vector<std::string> motion(clip_count);
  for (std::size_t j = 0; j < clip_count; ++j) motion[j] = decode_text(stream.clips[j].payloads(SectionTag::mtxt).front());

  auto keyframe_index = [&](std::size_t k) {
    return k < clip_count ? stream.clips[k].start_index : stream.clips.back().end_index;
  };
  auto keyframe_payload = [&](SectionTag tag, std::size_t k) {
    return k < clip_count ? stream.clips[k].payloads(tag).front() : stream.clips.back().payloads(tag).back();
  };

  std::vector<std::string> keyframe_text;
  if (h.mode == StreamMode::it2v) {
    for_each_item(n, jobs, nullptr, [&](GenerationBackend*, std::size_t k) {
      keyframes[k] = decode_keyframe(keyframe_payload(SectionTag::kimg, k), w, ht, planes);
    });
  } else {
    keyframe_text.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      keyframe_text[k] = decode_text(keyframe_payload(SectionTag::ktxt, k));
      keyframes[k] = placeholder_frame(w, ht, planes, keyframe_text[k], {}, keyframe_index(k));
    }
  }
  for (std::size_t k = 0; k < n; ++k) frames[keyframe_index(k)] = keyframes[k];

  const bool builtin_placeholder = h.mode == StreamMode::tt2v && backend.kind != BackendKind::external;
  for_each_item(clip_count, jobs, builtin_placeholder ? nullptr : &backend, [&](GenerationBackend* gen, std::size_t j) {
    const auto& clip = stream.clips[j];
    const std::size_t count = clip.end_index - clip.start_index - 1;
    if (builtin_placeholder) {
      for (std::size_t t = 0; t < count; ++t) {
        const std::size_t f = clip.start_index + 1 + t;
        frames[f] = placeholder_frame(w, ht, planes, keyframe_text[j], motion[j], f);
      }
      return;
    }
    WeightTrack weights = linear_schedule(count);
    if (const auto wg = clip.payloads(SectionTag::wgts); !wg.empty()) {
      weights = decode_weights(wg.front());
      if (weights.size() != count) {
        fail(ErrorKind::malformed_stream, "clip " + std::to_string(j) + " carries " + std::to_string(weights.size()) +
                                              " weight pairs for " + std::to_string(count) + " frames");
      }
    }
    GenerationRequest req{keyframes[j], keyframes[j + 1], motion[j], std::move(weights), count};
    auto generated = gen->generate(req);
    if (generated.size() != count) fail(ErrorKind::protocol_violation, "backend returned the wrong frame count");
    for (std::size_t t = 0; t < count; ++t) {
      require(generated[t].same_geometry(keyframes[j]), "generated frame geometry differs from the stream");
      frames[clip.start_index + 1 + t] = std::move(generated[t]);
    }
  });

  return RawVideo(w, ht, planes, FrameRate{h.frame_rate_num, h.frame_rate_den}, std::move(frames));
}

}  // namespace cmvc
