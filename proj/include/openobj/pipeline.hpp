#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "openobj/clustering.hpp"
#include "openobj/marching_cubes.hpp"
#include "openobj/retrieval.hpp"
#include "openobj/training.hpp"

namespace openobj {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Single structured config driving every pipeline stage. Unknown keys and
// invalid values are rejected at load time.
struct PipelineConfig {
    std::filesystem::path dataset;
    std::filesystem::path output;
    SimilarityConfig similarity;
    FineConfig fine;
    DescriptorOptions descriptors;
    TrainConfig training;
    int surface_resolution = 48;
    int render_samples = 32;
    double tau_agg = 0.15;
    uint64_t seed = 0;
    int threads = 1;
    bool dump_similarity = false;

    static PipelineConfig from_json_file(const std::filesystem::path& path);
    static PipelineConfig from_json(const nlohmann::json& j);
    void validate() const;  // throws ConfigError
};

struct RenderArgs {
    int frame = 0;  // pose source
};

struct QueryObjectArgs {
    std::filesystem::path clip;  // OBNT vector; empty path = half absent
    std::filesystem::path cap;
};

struct QueryPartArgs {
    int object_id = 0;
    std::filesystem::path embedding;
};

// Stage driver. Clustering/training artifacts are cached in memory within
// one Pipeline instance and persisted under cfg.output; stages that need a
// trained field fall back to checkpoints on disk.
class Pipeline {
public:
    explicit Pipeline(const PipelineConfig& cfg);

    nlohmann::json cluster();
    nlohmann::json train();
    nlohmann::json render(const RenderArgs& args);
    nlohmann::json extract_surfaces();
    nlohmann::json query_object(const QueryObjectArgs& args);
    nlohmann::json query_part(const QueryPartArgs& args);
    nlohmann::json eval_seg();
    nlohmann::json eval_retrieval();
    nlohmann::json run_all();

    // Dispatch by subcommand name; writes <output>/result.json.
    nlohmann::json run(const std::string& command, const RenderArgs& render_args = {},
                       const QueryObjectArgs& qo = {}, const QueryPartArgs& qp = {});

    const Dataset& dataset() const { return ds_; }
    const std::vector<ObjectInstance>& objects();
    const std::vector<FieldNetwork>& fields();
    const std::vector<ObjectSummary>& summaries();

private:
    PipelineConfig cfg_;
    Dataset ds_;
    FeatureImageCache features_;
    std::optional<std::vector<MaskDescriptor>> descriptors_;
    std::optional<std::vector<ObjectInstance>> objects_;
    std::optional<std::vector<FieldNetwork>> fields_;
    std::optional<std::vector<ObjectSummary>> summaries_;
    std::optional<std::vector<SurfaceMesh>> surfaces_;

    const std::vector<MaskDescriptor>& get_descriptors();
    const std::vector<SurfaceMesh>& get_surfaces();
    std::filesystem::path checkpoint_path(int object_id) const;
    void write_objects_json() const;
    void write_summaries() const;
    // Majority ground-truth object id per clustered object; throws when the
    // dataset carries no ground truth.
    std::vector<int> gt_object_ids();
};

}  // namespace openobj
