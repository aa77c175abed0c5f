#ifndef OCCUPANCY_PIPELINE_HPP
#define OCCUPANCY_PIPELINE_HPP

// Estimation session: initialization mask, periodic mask refresh, per-pair estimation
// and memory propagation over a sampled frame sequence.

#include <algorithm>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "occupancy/ccl.hpp"
#include "occupancy/filtering.hpp"
#include "occupancy/frame_io.hpp"
#include "occupancy/metrics.hpp"
#include "occupancy/motion.hpp"
#include "occupancy/params.hpp"
#include "occupancy/segmentation.hpp"

namespace occupancy {

struct SessionState {
  BinaryMap mask;
  int frames_since_mask_update = 0;
  std::deque<int> memory;  // up to memory_size - 1 most recent raw counts, oldest first
  std::optional<BinaryMap> prev_segmentation;
  int next_frame_index = 0;
};

/// Everything one step produced; the maps feed the annotated output.
struct StepOutput {
  EstimateRecord record;
  BinaryMap segmentation;
  DifferenceMap difference;  // equals the segmentation on the first step
};

/// Median of the window plus the new count; the lower middle for even sizes.
inline int window_median(std::span<const int> window, int raw_count) {
  std::vector<int> v(window.begin(), window.end());
  v.push_back(raw_count);
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

/// Smooths a raw count over a window of memory_size counts: the memory_size - 1 most recent raw counts
/// plus this one. The raw count is then pushed. Storing smoothed values instead would let the median
/// lock onto a stale level forever.
inline int memory_propagate(int raw_count, std::deque<int>& memory, int memory_size) {
  if (memory_size < 1) throw ParameterError("memory_size must be >= 1");
  const auto history = static_cast<std::size_t>(memory_size - 1);
  while (memory.size() > history) memory.pop_front();
  const std::vector<int> window(memory.begin(), memory.end());
  const int final_count = window_median(window, raw_count);
  memory.push_back(raw_count);
  while (memory.size() > history) memory.pop_front();
  return final_count;
}

inline SessionState init_session(const ThermalFrame& first_frame, const Params& params) {
  validate(params);
  SessionState s;
  s.mask = segment_unmasked(first_frame, params);
  return s;
}

/// One estimation step from the frame's unmasked segmentation (hot cluster, lighting threshold, blur).
/// The same map serves as the refreshed mask when a refresh is due.
inline StepOutput step_segmented(SessionState& state, const BinaryMap& unmasked, const Params& params,
                                 std::optional<int> ground_truth = std::nullopt) {
  if (!state.mask.same_shape(unmasked)) throw DataError("step: frame does not match the session resolution");
  StepOutput out;
  out.segmentation = apply_mask(unmasked, state.mask);
  out.difference = state.prev_segmentation ? difference_catcher(*state.prev_segmentation, out.segmentation)
                                           : out.segmentation;
  const LabelMap labels = label_components(out.difference, params.connectivity);

  EstimateRecord& r = out.record;
  r.frame_index = state.next_frame_index++;
  r.raw_count = noise_filter(labels, params.noise_low, params.noise_high).raw_count;
  r.final_count = memory_propagate(r.raw_count, state.memory, params.memory_size);
  r.ground_truth = ground_truth;
  if (ground_truth) r.confidence = confidence(r.final_count, *ground_truth);

  if (++state.frames_since_mask_update >= params.mask_update_frequency) {
    state.mask = unmasked;
    state.frames_since_mask_update = 0;
  }
  state.prev_segmentation = out.segmentation;
  return out;
}

/// Segment the frame against the current mask, difference against the previous segmentation,
/// label, filter by area, smooth; then refresh the mask if due.
inline StepOutput step(SessionState& state, const ThermalFrame& frame, const Params& params,
                       std::optional<int> ground_truth = std::nullopt) {
  return step_segmented(state, segment_unmasked(frame, params), params, ground_truth);
}

/// Sampled frames of a manifest, normalized to the working resolution.
inline std::vector<ThermalFrame> load_working_frames(const SequenceManifest& manifest) {
  std::vector<ThermalFrame> frames = sample_frames(manifest);
  for (auto& f : frames) f = crop_resize(f, kWorkingWidth, kWorkingHeight);
  return frames;
}

inline std::optional<int> truth_at(const SequenceManifest& manifest, int sampled_index) {
  if (!manifest.ground_truth) return std::nullopt;
  const auto it = manifest.ground_truth->find(sampled_index);
  if (it == manifest.ground_truth->end()) return std::nullopt;
  return it->second;
}

/// Runs a whole session. `ground_truth[i]`, when present, is attached to record i.
/// `on_step` is called after every step with the step output.
template <typename OnStep>
std::vector<EstimateRecord> run_session(std::span<const ThermalFrame> frames, const Params& params,
                                        std::span<const std::optional<int>> ground_truth, OnStep&& on_step) {
  validate(params);
  std::vector<EstimateRecord> records;
  if (frames.empty()) return records;
  SessionState state = init_session(frames.front(), params);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::optional<int> truth = i < ground_truth.size() ? ground_truth[i] : std::nullopt;
    StepOutput out = step(state, frames[i], params, truth);
    on_step(frames[i], static_cast<const StepOutput&>(out));
    records.push_back(out.record);
  }
  return records;
}

inline std::vector<EstimateRecord> run_session(std::span<const ThermalFrame> frames, const Params& params,
                                               std::span<const std::optional<int>> ground_truth = {}) {
  return run_session(frames, params, ground_truth, [](const ThermalFrame&, const StepOutput&) {});
}

inline std::vector<std::optional<int>> truth_vector(const SequenceManifest& manifest, std::size_t frames) {
  std::vector<std::optional<int>> gt(frames);
  for (std::size_t i = 0; i < frames; ++i) gt[i] = truth_at(manifest, static_cast<int>(i));
  return gt;
}

}  // namespace occupancy

#endif  // OCCUPANCY_PIPELINE_HPP
