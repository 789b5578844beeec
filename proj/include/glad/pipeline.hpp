#pragma once

#include "glad/datagen.hpp"
#include "glad/eval.hpp"
#include "glad/text_embed.hpp"

#include <string>

namespace glad {

// End-to-end configuration: text embedding, purpose classifier, joint
// training and the split harness. Loaded from a JSON document where every
// key is optional.
struct PipelineConfig {
  uint64_t seed = 1;
  PvdmConfig pvdm;
  int pvdm_min_count = 1;
  SvmOptions svm;
  bool svm_binary_cp = false;
  TrainConfig train;
  SplitSpec splits;
  int jobs = 0;  // 0 = hardware concurrency
};

PipelineConfig pipeline_config_from_json_file(const std::string& path);
PipelineConfig default_pipeline_config();

// Purpose classifier plus the context embedder that produced its inputs.
// In binary mode an extra clear-vs-Other machine drives the CP flag.
struct PurposeBundle {
  PvdmModel embedder;
  OvrSvmModel svm;
  bool binary_mode = false;
  BinaryCpModel binary;

  PurposeCategory classify_context(const std::string& context) const;
  PurposeFn as_fn() const;
};

void save_purpose_bundle(const PurposeBundle& bundle, const std::string& path);
PurposeBundle load_purpose_bundle(const std::string& path);

PurposeBundle train_purpose_bundle(const CitationNetwork& net,
                                   const std::vector<Annotation>& annotations,
                                   const PipelineConfig& cfg);

// Same, but reuses an already trained context embedder.
PurposeBundle make_purpose_bundle(PvdmModel embedder, const std::vector<Annotation>& annotations,
                                  const PipelineConfig& cfg);

// Dataset directory contents (as written by export_dataset).
struct DatasetDir {
  CitationNetwork net;
  std::vector<Annotation> annotations;
};

DatasetDir load_dataset_dir(const std::string& dir);

// PV-DM over the abstracts in row order, then X and Z.
PvdmModel train_text_model(const CitationNetwork& net, const PipelineConfig& cfg);

PreparedData prepare_data(const CitationNetwork& net, const PvdmModel& pvdm,
                          const PurposeBundle& purpose);

// Full trained artifact: text model, joint model, and the config used.
struct ModelBundle {
  PvdmModel pvdm;
  JointModel joint;
};

void save_model_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_model_bundle(const std::string& path);

int effective_jobs(const PipelineConfig& cfg);

}  // namespace glad
