#pragma once

#include "glad/graph.hpp"
#include "glad/purpose.hpp"

#include <array>
#include <string>
#include <vector>

namespace glad {

struct CartelSpec {
  std::string donor_journal;
  std::string recipient_journal;
  int n_anomalous_papers = 5;
  int refs_per_anomalous_paper = 40;
  double fraction_to_recipient = 0.75;
};

struct GeneratorConfig {
  int n_papers = 1000;
  int n_journals = 12;
  int n_authors = 600;
  int n_topics = 4;
  std::vector<CartelSpec> cartels;
  // expected background references per paper; used when no anomaly rate is
  // targeted (the rate, when positive, fixes the background volume instead)
  double base_citation_density = 4.4;
  double anomaly_rate_target = 0.0;
  std::array<double, kNumCategories> purpose_mix = {0.14, 0.09, 0.17, 0.04, 0.30, 0.26};
  uint64_t seed = 1;

  // generator-specific knobs
  double relation_overlap_fraction = 0.3;  // share of anomalous edges with an
                                           // engineered author/institution tie
  double fan_fraction = 0.10;   // background papers loyal to another same-topic journal
  double cross_topic_fraction = 0.12;  // background citations that leave the topic
  int n_annotations = 1080;     // purpose-annotation sample size
};

// Paper-scale default: ~4.7k edges with ~6.4% anomalous across two cartels.
GeneratorConfig default_generator_config();

struct SyntheticDataset {
  std::vector<Paper> papers;
  std::vector<CitationEdge> edges;
  std::vector<PurposeCategory> edge_purpose;  // ground truth, aligned with edges
  std::vector<int> anomalous_edges;           // manifest
  GeneratorConfig config;

  CitationNetwork network() const;
};

SyntheticDataset generate(const GeneratorConfig& config);

// Writes papers.jsonl, citations.jsonl, annotations.jsonl and manifest.json;
// re-ingest through CitationNetwork::from_files is lossless.
void export_dataset(const SyntheticDataset& ds, const std::string& out_dir);

struct Annotation {
  std::string context;
  PurposeCategory category = PurposeCategory::Other;
};

std::vector<Annotation> load_annotations(const std::string& path);

GeneratorConfig generator_config_from_json_file(const std::string& path);
void write_generator_config(const GeneratorConfig& config, const std::string& path);

// Union of the per-topic abstract vocabularies, for overlap diagnostics.
std::vector<std::string> topic_vocabulary(const GeneratorConfig& config, int topic);

}  // namespace glad
