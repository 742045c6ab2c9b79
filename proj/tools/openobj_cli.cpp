#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "openobj/pipeline.hpp"
#include "openobj/synthetic.hpp"

using namespace openobj;

int main(int argc, char** argv) {
    CLI::App app{"Open-vocabulary object map builder"};
    app.require_subcommand(1);

    // gen-synthetic is standalone; every other subcommand drives the pipeline
    // from a config file plus flag overrides (flags win).
    std::string scene = "three-box";
    std::string gen_out;
    uint64_t gen_seed = 0;
    auto* gen = app.add_subcommand("gen-synthetic", "Generate a synthetic RGB-D dataset");
    gen->add_option("--scene", scene, "'three-box' or a scene spec JSON path");
    gen->add_option("--out", gen_out, "output dataset directory")->required();
    gen->add_option("--seed", gen_seed, "embedding-noise seed");

    std::string config_path, dataset_override, output_override;
    uint64_t seed_override = 0;
    int threads_override = 0;
    bool have_seed = false, dump_similarity = false;
    RenderArgs render_args;
    QueryObjectArgs qo;
    QueryPartArgs qp;
    std::string clip_path, cap_path, part_embedding;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "pipeline config JSON")->required();
        cmd->add_option("--dataset", dataset_override, "override dataset path");
        cmd->add_option("--output", output_override, "override output directory");
        cmd->add_option("--seed", seed_override, "override seed");
        cmd->add_option("--threads", threads_override, "worker thread cap");
        return cmd;
    };

    auto* cluster = add_common(app.add_subcommand("cluster", "Associate masks into objects"));
    cluster->add_flag("--dump-similarity", dump_similarity, "write the full similarity matrix");
    add_common(app.add_subcommand("train", "Train one field per object"));
    auto* render = add_common(app.add_subcommand("render", "Render color/depth/feature images"));
    render->add_option("--frame", render_args.frame, "frame whose pose to render");
    add_common(app.add_subcommand("extract-surface", "Extract iso-0.5 surfaces"));
    auto* qobj = add_common(app.add_subcommand("query-object", "Rank objects by embedding"));
    qobj->add_option("--clip", clip_path, "query clip embedding (OBNT vector)");
    qobj->add_option("--cap", cap_path, "query caption embedding (OBNT vector)");
    auto* qprt = add_common(app.add_subcommand("query-part", "Score surface points by embedding"));
    qprt->add_option("--object", qp.object_id, "object id")->required();
    qprt->add_option("--embedding", part_embedding, "query embedding (OBNT vector)")->required();
    add_common(app.add_subcommand("eval-seg", "Semantic segmentation metrics vs ground truth"));
    add_common(app.add_subcommand("eval-retrieval", "Retrieval recall vs ground truth"));
    add_common(app.add_subcommand("run-all", "Full pipeline: cluster, train, surfaces, eval"));

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        try {
            SceneSpec spec =
                scene == "three-box" ? make_three_box_scene() : SceneSpec::from_json_file(scene);
            generate_synthetic_scene(spec, gen_seed, gen_out);
            std::printf("wrote synthetic dataset to %s\n", gen_out.c_str());
            return 0;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 1;
        }
    }

    CLI::App* sub = app.get_subcommands().front();
    have_seed = sub->count("--seed") > 0;

    PipelineConfig cfg;
    try {
        cfg = PipelineConfig::from_json_file(config_path);
        if (!dataset_override.empty()) cfg.dataset = dataset_override;
        if (!output_override.empty()) cfg.output = output_override;
        if (have_seed) cfg.seed = seed_override;
        if (threads_override > 0) cfg.threads = threads_override;
        if (dump_similarity) cfg.dump_similarity = true;
        cfg.validate();
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    qo.clip = clip_path;
    qo.cap = cap_path;
    qp.embedding = part_embedding;

    try {
        Pipeline pipeline(cfg);
        nlohmann::json result = pipeline.run(sub->get_name(), render_args, qo, qp);
        std::printf("%s\n", result.dump(2).c_str());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
