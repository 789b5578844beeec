#include "glad/datagen.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace glad {

using nlohmann::json;

namespace {

constexpr int kTopicWords = 45;
constexpr int kYearLo = 2000;
constexpr int kYearHi = 2019;
constexpr int kRecipientYearHi = 2009;  // recipient papers predate donors
constexpr int kCartelYearLo = 2012;
constexpr double kFanRefBias = 0.7;
constexpr double kAnomalousOtherBias = 0.85;
constexpr double kAuthorSelfCiteRate = 0.05;

// shared academic filler; covers the purpose-template keywords so the text
// embedder sees them during abstract training
const std::vector<std::string>& shared_words() {
  static const std::vector<std::string> words = {
      "we",        "use",      "adopt",     "apply",      "employ",     "method",
      "tool",      "compare",  "baseline",  "versus",     "comparison", "weakness",
      "flawed",    "limitation", "criticize", "shortcoming", "support",  "verify",
      "confirm",   "corroborate", "substantiates", "basis", "foundation", "motivates",
      "inspires",  "builds",   "extend",    "see",        "noted",      "mentioned",
      "background", "literature", "reference", "cited",    "results",    "findings",
      "approach",  "study",    "data",      "analysis",   "framework",  "system"};
  return words;
}

std::string topic_word(int topic, int j) {
  return "t" + std::to_string(topic) + "w" + std::to_string(j);
}

std::string journal_name(int j) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "J%02d", j);
  return buf;
}

struct Templates {
  // one slot per sentence, filled with a topic word of the citing paper
  std::array<std::vector<std::string>, kNumCategories> by_category;
};

const Templates& purpose_templates() {
  static const Templates t = [] {
    Templates tp;
    tp.by_category[0] = {
        "the reference shows clear weakness and flawed assumptions in {}",
        "we criticize the shortcoming of the cited approach for {}",
        "a serious limitation appears in the reference when applied to {}",
        "the cited method suffers from weakness under {} conditions"};
    tp.by_category[1] = {
        "we compare our approach against the cited baseline on {}",
        "compared with the reference our results on {} differ",
        "the reference serves as baseline versus our {} method",
        "comparison with the cited work covers {} settings"};
    tp.by_category[2] = {
        "we use the method of the reference to build {}",
        "we adopt the cited tool for {} processing",
        "our system employs the referenced technique for {}",
        "we apply the cited algorithm to {} data"};
    tp.by_category[3] = {
        "our findings support and verify the claims of the reference on {}",
        "the results corroborate the cited observations about {}",
        "our measurements confirm the reference conclusions for {}",
        "this outcome substantiates the cited finding in {}"};
    tp.by_category[4] = {
        "the reference motivates and inspires our work on {}",
        "our study builds on the foundation laid by the cited paper for {}",
        "the cited theory forms the basis of our {} analysis",
        "we extend the referenced framework toward {}"};
    tp.by_category[5] = {
        "see also the reference for related discussion of {}",
        "as noted elsewhere in the literature {} remains open",
        "the reference is mentioned in passing regarding {}",
        "further background appears in the cited report on {}"};
    return tp;
  }();
  return t;
}

std::string fill_template(const std::string& tpl, const std::string& word) {
  std::string out = tpl;
  size_t pos = out.find("{}");
  if (pos != std::string::npos) out.replace(pos, 2, word);
  return out;
}

struct Builder {
  const GeneratorConfig& cfg;
  Rng rng;
  std::vector<Paper> papers;
  std::vector<int> topic_of;           // per paper
  std::vector<int> fan_journal;        // per paper, -1 if not a fan
  std::vector<std::vector<int>> papers_by_topic;
  std::vector<std::vector<int>> papers_by_journal;
  std::vector<std::vector<std::string>> authors_by_topic;
  std::unordered_map<std::string, std::string> author_home;  // author -> institution
  std::unordered_map<std::string, std::vector<int>> first_author_papers;

  std::vector<CitationEdge> edges;
  std::vector<int> edge_src_row, edge_dst_row;
  std::vector<int> edge_label;
  std::unordered_set<int64_t> edge_set;
  std::vector<int> cartel_paper_rows;

  explicit Builder(const GeneratorConfig& c) : cfg(c), rng(derive_seed(c.seed, 0xDA7A)) {}

  int topic_of_journal(int j) const { return j % cfg.n_topics; }

  bool add_edge(int src, int dst, int label) {
    if (src == dst) return false;
    int64_t key = (static_cast<int64_t>(src) << 32) | static_cast<uint32_t>(dst);
    if (!edge_set.insert(key).second) return false;
    edges.push_back({papers[static_cast<size_t>(src)].id, papers[static_cast<size_t>(dst)].id,
                     "", label == 1 ? EdgeLabel::Anomalous : EdgeLabel::Normal});
    edge_src_row.push_back(src);
    edge_dst_row.push_back(dst);
    edge_label.push_back(label);
    return true;
  }

  std::string make_abstract(int topic) {
    std::string abs = topic_word(topic, 0);  // topic marker guarantees overlap
    int n_topic = 8 + static_cast<int>(rng.uniform_int(0, 4));
    for (int i = 0; i < n_topic; ++i)
      abs += " " + topic_word(topic, static_cast<int>(rng.uniform_int(1, kTopicWords - 1)));
    int n_shared = 3 + static_cast<int>(rng.uniform_int(0, 2));
    const auto& shared = shared_words();
    for (int i = 0; i < n_shared; ++i)
      abs += " " + shared[static_cast<size_t>(
                 rng.uniform_int(0, static_cast<int64_t>(shared.size()) - 1))];
    return abs;
  }

  void build_background_papers() {
    int n_cartel = 0;
    for (const CartelSpec& c : cfg.cartels) n_cartel += c.n_anomalous_papers;
    int n_bg = cfg.n_papers - n_cartel;
    if (n_bg < cfg.n_journals * 2)
      throw Error("generate: too few background papers for the journal count");

    int n_inst = std::max(4, cfg.n_authors / 10);
    authors_by_topic.resize(static_cast<size_t>(cfg.n_topics));
    for (int a = 0; a < cfg.n_authors; ++a) {
      std::string name = "a" + std::to_string(a);
      authors_by_topic[static_cast<size_t>(a % cfg.n_topics)].push_back(name);
      author_home[name] = "inst" + std::to_string(a % n_inst);
    }

    papers_by_topic.resize(static_cast<size_t>(cfg.n_topics));
    papers_by_journal.resize(static_cast<size_t>(cfg.n_journals));

    std::set<std::string> recipient_journals;
    for (const CartelSpec& c : cfg.cartels) recipient_journals.insert(c.recipient_journal);

    int width = static_cast<int>(std::to_string(cfg.n_papers).size());
    for (int i = 0; i < n_bg; ++i) {
      int journal = static_cast<int>(rng.uniform_int(0, cfg.n_journals - 1));
      int topic = topic_of_journal(journal);
      Paper p;
      char idbuf[24];
      std::snprintf(idbuf, sizeof(idbuf), "p%0*d", width, i);
      p.id = idbuf;
      p.journal_id = journal_name(journal);
      bool recipient = recipient_journals.count(p.journal_id) > 0;
      p.year = static_cast<int>(
          rng.uniform_int(kYearLo, recipient ? kRecipientYearHi : kYearHi));
      p.title = "study " + std::to_string(i);
      p.abstract_text = make_abstract(topic);

      const auto& pool = authors_by_topic[static_cast<size_t>(topic)];
      int n_auth = 1 + static_cast<int>(rng.uniform_int(0, 2));
      std::set<std::string> chosen;
      while (static_cast<int>(chosen.size()) < n_auth)
        chosen.insert(pool[static_cast<size_t>(
            rng.uniform_int(0, static_cast<int64_t>(pool.size()) - 1))]);
      p.author_ids.assign(chosen.begin(), chosen.end());
      p.institution_ids.push_back(author_home[p.author_ids.front()]);
      if (p.author_ids.size() > 1 && rng.uniform01() < 0.5)
        p.institution_ids.push_back(author_home[p.author_ids[1]]);

      int row = static_cast<int>(papers.size());
      papers.push_back(std::move(p));
      topic_of.push_back(topic);
      papers_by_topic[static_cast<size_t>(topic)].push_back(row);
      papers_by_journal[static_cast<size_t>(journal)].push_back(row);
      first_author_papers[papers.back().author_ids.front()].push_back(row);

      int fan = -1;
      if (rng.uniform01() < cfg.fan_fraction) {
        // loyal to another journal of the same topic
        std::vector<int> options;
        for (int j = 0; j < cfg.n_journals; ++j)
          if (topic_of_journal(j) == topic && j != journal) options.push_back(j);
        if (!options.empty())
          fan = options[static_cast<size_t>(
              rng.uniform_int(0, static_cast<int64_t>(options.size()) - 1))];
      }
      fan_journal.push_back(fan);
    }
  }

  int journal_index(const std::string& name) const {
    for (int j = 0; j < cfg.n_journals; ++j)
      if (journal_name(j) == name) return j;
    throw Error("generate: unknown journal in cartel spec: " + name);
  }

  void build_cartel_papers() {
    int serial = 0;
    for (const CartelSpec& spec : cfg.cartels) {
      int donor = journal_index(spec.donor_journal);
      int recipient = journal_index(spec.recipient_journal);
      int donor_topic = topic_of_journal(donor);
      int recipient_topic = topic_of_journal(recipient);
      if (donor_topic == recipient_topic)
        throw Error("generate: donor and recipient journals share a topic: " +
                    spec.donor_journal + " / " + spec.recipient_journal);

      const auto& recipients = papers_by_journal[static_cast<size_t>(recipient)];
      int per_recipient = static_cast<int>(
          std::lround(spec.fraction_to_recipient * spec.refs_per_anomalous_paper));
      if (per_recipient < 1 || per_recipient > static_cast<int>(recipients.size()))
        throw Error("generate: recipient journal " + spec.recipient_journal + " has only " +
                    std::to_string(recipients.size()) + " papers, need " +
                    std::to_string(per_recipient));

      // early first-authored donor-topic papers guarantee reverse-citation
      // targets for the CB mechanism
      std::vector<int> early;
      for (int row : papers_by_topic[static_cast<size_t>(donor_topic)])
        if (papers[static_cast<size_t>(row)].year <= 2004) early.push_back(row);

      for (int k = 0; k < spec.n_anomalous_papers; ++k) {
        Paper p;
        p.id = "pcartel" + std::to_string(serial++);
        p.journal_id = spec.donor_journal;
        p.year = static_cast<int>(rng.uniform_int(kCartelYearLo, kYearHi));
        p.title = "cartel survey " + std::to_string(serial);
        p.abstract_text = make_abstract(donor_topic);

        std::string fa;
        if (!early.empty()) {
          int anchor = early[static_cast<size_t>(
              rng.uniform_int(0, static_cast<int64_t>(early.size()) - 1))];
          fa = papers[static_cast<size_t>(anchor)].author_ids.front();
        } else {
          const auto& pool = authors_by_topic[static_cast<size_t>(donor_topic)];
          fa = pool[static_cast<size_t>(
              rng.uniform_int(0, static_cast<int64_t>(pool.size()) - 1))];
        }
        p.author_ids.push_back(fa);
        const auto& pool = authors_by_topic[static_cast<size_t>(donor_topic)];
        while (p.author_ids.size() < 3) {
          std::string a = pool[static_cast<size_t>(
              rng.uniform_int(0, static_cast<int64_t>(pool.size()) - 1))];
          if (std::find(p.author_ids.begin(), p.author_ids.end(), a) == p.author_ids.end())
            p.author_ids.push_back(a);
        }
        p.institution_ids.push_back(author_home[fa]);

        int row = static_cast<int>(papers.size());
        papers.push_back(std::move(p));
        topic_of.push_back(donor_topic);
        papers_by_topic[static_cast<size_t>(donor_topic)].push_back(row);
        papers_by_journal[static_cast<size_t>(donor)].push_back(row);
        first_author_papers[papers.back().author_ids.front()].push_back(row);
        fan_journal.push_back(-1);
        cartel_paper_rows.push_back(row);

        // anomalous references into the recipient journal
        std::vector<int> pool_rows = recipients;
        rng.shuffle(pool_rows);
        int placed = 0;
        for (int cand : pool_rows) {
          if (placed >= per_recipient) break;
          if (add_edge(row, cand, 1)) ++placed;
        }

        // remaining references look normal: half own topic, half the
        // recipient topic outside the recipient journal
        int other = spec.refs_per_anomalous_paper - per_recipient;
        int placed_other = 0;
        int guard = 0;
        while (placed_other < other && guard++ < other * 60) {
          bool own_topic = rng.uniform01() < 0.5;
          int t = own_topic ? donor_topic : recipient_topic;
          const auto& tp = papers_by_topic[static_cast<size_t>(t)];
          int cand = tp[static_cast<size_t>(
              rng.uniform_int(0, static_cast<int64_t>(tp.size()) - 1))];
          const Paper& cp = papers[static_cast<size_t>(cand)];
          if (cp.year > papers[static_cast<size_t>(row)].year) continue;
          if (!own_topic && cp.journal_id == spec.recipient_journal) continue;
          if (cand == row) continue;
          if (add_edge(row, cand, 0)) ++placed_other;
        }
      }
    }
  }

  // Shares authors, institutions, collaborations and reverse citations
  // between cartel papers and their recipients so the relational features
  // fire on roughly the configured fraction of anomalous edges.
  void apply_relation_overlap() {
    int mechanism = 0;
    for (int row : cartel_paper_rows) {
      std::vector<int> my_anomalous;
      for (size_t e = 0; e < edges.size(); ++e)
        if (edge_src_row[e] == row && edge_label[e] == 1)
          my_anomalous.push_back(static_cast<int>(e));
      int m = static_cast<int>(
          std::lround(cfg.relation_overlap_fraction * static_cast<double>(my_anomalous.size())));
      for (int k = 0; k < m; ++k) {
        int e = my_anomalous[static_cast<size_t>(k)];
        int dst = edge_dst_row[static_cast<size_t>(e)];
        Paper& src_paper = papers[static_cast<size_t>(row)];
        const Paper& dst_paper = papers[static_cast<size_t>(dst)];
        std::string dst_fa = dst_paper.author_ids.front();
        switch (mechanism++ % 4) {
          case 0: {  // shared author
            if (std::find(src_paper.author_ids.begin(), src_paper.author_ids.end(), dst_fa) ==
                src_paper.author_ids.end())
              src_paper.author_ids.push_back(dst_fa);
            break;
          }
          case 1: {  // shared institution for the first authors
            std::string inst = author_home[dst_fa];
            if (std::find(src_paper.institution_ids.begin(), src_paper.institution_ids.end(),
                          inst) == src_paper.institution_ids.end())
              src_paper.institution_ids.push_back(inst);
            break;
          }
          case 2: {  // collaboration on a third paper
            const auto& tp = papers_by_topic[static_cast<size_t>(
                topic_of[static_cast<size_t>(row)])];
            int y = tp[static_cast<size_t>(k % tp.size())];
            if (y == row || y == dst) break;
            Paper& third = papers[static_cast<size_t>(y)];
            std::string src_fa = src_paper.author_ids.front();
            if (std::find(third.author_ids.begin(), third.author_ids.end(), src_fa) ==
                third.author_ids.end())
              third.author_ids.push_back(src_fa);
            if (std::find(third.author_ids.begin(), third.author_ids.end(), dst_fa) ==
                third.author_ids.end())
              third.author_ids.push_back(dst_fa);
            break;
          }
          case 3: {  // prior reverse citation: dst's first author cited src's
            std::string src_fa = src_paper.author_ids.front();
            auto it = first_author_papers.find(src_fa);
            bool done = false;
            if (it != first_author_papers.end()) {
              for (int v : it->second) {
                if (v == row) continue;
                if (papers[static_cast<size_t>(v)].year <= dst_paper.year &&
                    add_edge(dst, v, 0)) {
                  done = true;
                  break;
                }
              }
            }
            if (!done && std::find(src_paper.author_ids.begin(), src_paper.author_ids.end(),
                                   dst_fa) == src_paper.author_ids.end())
              src_paper.author_ids.push_back(dst_fa);  // fall back to a shared author
            break;
          }
        }
      }
    }
  }

  void build_background_edges() {
    long anomalous = 0;
    for (int lab : edge_label)
      if (lab == 1) ++anomalous;

    long budget;
    if (cfg.anomaly_rate_target > 0.0) {
      if (anomalous == 0)
        throw Error("generate: anomaly_rate_target is positive but no cartel produces "
                    "anomalous edges (achievable rate 0)");
      long total_target = std::lround(static_cast<double>(anomalous) / cfg.anomaly_rate_target);
      budget = total_target - static_cast<long>(edges.size());
      if (budget < 0) {
        double achievable =
            static_cast<double>(anomalous) / static_cast<double>(edges.size());
        throw Error("generate: anomaly_rate_target " + fmt_g17(cfg.anomaly_rate_target) +
                    " unreachable; achievable rate with zero background is " +
                    fmt_g17(achievable));
      }
    } else {
      if (anomalous > 0)
        throw Error("generate: anomaly_rate_target 0 is unreachable with cartels configured "
                    "(achievable rate " +
                    fmt_g17(static_cast<double>(anomalous) /
                            static_cast<double>(std::max<size_t>(1, edges.size()))) +
                    ")");
      long n_bg = static_cast<long>(papers.size()) - static_cast<long>(cartel_paper_rows.size());
      budget = std::lround(cfg.base_citation_density * static_cast<double>(n_bg));
    }

    // donor-topic -> recipient-topic pairs attract extra cross-topic traffic
    std::unordered_map<int, std::vector<int>> cartel_cross;
    for (const CartelSpec& spec : cfg.cartels)
      cartel_cross[topic_of_journal(journal_index(spec.donor_journal))]
          .push_back(topic_of_journal(journal_index(spec.recipient_journal)));

    int n_bg_papers = static_cast<int>(papers.size()) -
                      static_cast<int>(cartel_paper_rows.size());
    long placed = 0;
    long attempts_cap = budget * 80;
    long attempts = 0;
    while (placed < budget && attempts++ < attempts_cap) {
      int citing = static_cast<int>(rng.uniform_int(0, n_bg_papers - 1));
      const Paper& cp = papers[static_cast<size_t>(citing)];
      int topic = topic_of[static_cast<size_t>(citing)];

      int cand = -1;
      if (fan_journal[static_cast<size_t>(citing)] >= 0 && rng.uniform01() < kFanRefBias) {
        const auto& jr =
            papers_by_journal[static_cast<size_t>(fan_journal[static_cast<size_t>(citing)])];
        cand = jr[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(jr.size()) - 1))];
      } else if (rng.uniform01() < kAuthorSelfCiteRate) {
        const auto& own = first_author_papers[cp.author_ids.front()];
        if (own.size() > 1)
          cand = own[static_cast<size_t>(
              rng.uniform_int(0, static_cast<int64_t>(own.size()) - 1))];
      }
      if (cand < 0) {
        int t = topic;
        if (rng.uniform01() < cfg.cross_topic_fraction) {
          auto it = cartel_cross.find(topic);
          if (it != cartel_cross.end() && rng.uniform01() < 0.5) {
            const auto& rts = it->second;
            t = rts[static_cast<size_t>(
                rng.uniform_int(0, static_cast<int64_t>(rts.size()) - 1))];
          } else {
            t = static_cast<int>(rng.uniform_int(0, cfg.n_topics - 1));
            if (t == topic) t = (t + 1) % cfg.n_topics;
          }
        }
        const auto& tp = papers_by_topic[static_cast<size_t>(t)];
        cand = tp[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(tp.size()) - 1))];
      }
      if (cand == citing) continue;
      if (papers[static_cast<size_t>(cand)].year > cp.year) continue;
      if (add_edge(citing, cand, 0)) ++placed;
    }
  }

  void assign_contexts_and_refs(std::vector<PurposeCategory>& purposes) {
    const Templates& tpl = purpose_templates();
    purposes.resize(edges.size());
    for (size_t e = 0; e < edges.size(); ++e) {
      PurposeCategory cat;
      if (edge_label[e] == 1 && rng.uniform01() < kAnomalousOtherBias) {
        cat = PurposeCategory::Other;
      } else {
        double u = rng.uniform01();
        double acc = 0.0;
        int pick = kNumCategories - 1;
        for (int c = 0; c < kNumCategories; ++c) {
          acc += cfg.purpose_mix[static_cast<size_t>(c)];
          if (u < acc) {
            pick = c;
            break;
          }
        }
        cat = static_cast<PurposeCategory>(pick + 1);
      }
      purposes[e] = cat;
      const auto& sentences = tpl.by_category[static_cast<size_t>(static_cast<int>(cat) - 1)];
      const std::string& sentence = sentences[static_cast<size_t>(
          rng.uniform_int(0, static_cast<int64_t>(sentences.size()) - 1))];
      int src_topic = topic_of[static_cast<size_t>(edge_src_row[e])];
      std::string filler =
          topic_word(src_topic, static_cast<int>(rng.uniform_int(1, kTopicWords - 1)));
      edges[e].context = fill_template(sentence, filler);
    }
    // reference lists mirror the generated citations
    for (size_t e = 0; e < edges.size(); ++e)
      papers[static_cast<size_t>(edge_src_row[e])].reference_ids.push_back(
          papers[static_cast<size_t>(edge_dst_row[e])].id);
  }
};

}  // namespace

GeneratorConfig default_generator_config() {
  GeneratorConfig cfg;
  cfg.anomaly_rate_target = 300.0 / 4718.0;
  cfg.cartels.push_back({"J00", "J01", 5, 40, 0.75});
  cfg.cartels.push_back({"J02", "J03", 5, 40, 0.75});
  return cfg;
}

CitationNetwork SyntheticDataset::network() const {
  return CitationNetwork::build(papers, edges);
}

SyntheticDataset generate(const GeneratorConfig& config) {
  double mix_sum = 0.0;
  for (double v : config.purpose_mix) {
    if (v < 0.0) throw Error("generate: negative purpose_mix entry");
    mix_sum += v;
  }
  if (std::abs(mix_sum - 1.0) > 1e-9)
    throw Error("generate: purpose_mix sums to " + fmt_g17(mix_sum) + ", expected 1");
  for (const CartelSpec& c : config.cartels)
    if (c.fraction_to_recipient <= 0.0 || c.fraction_to_recipient > 1.0)
      throw Error("generate: fraction_to_recipient must be in (0,1]");
  if (config.n_topics < 2) throw Error("generate: need at least 2 topics");
  if (config.n_journals < config.n_topics)
    throw Error("generate: need at least one journal per topic");
  if (config.anomaly_rate_target < 0.0 || config.anomaly_rate_target >= 1.0)
    throw Error("generate: anomaly_rate_target must be in [0,1)");

  Builder b(config);
  b.build_background_papers();
  b.build_cartel_papers();
  b.apply_relation_overlap();
  b.build_background_edges();

  SyntheticDataset ds;
  ds.config = config;
  b.assign_contexts_and_refs(ds.edge_purpose);
  ds.papers = std::move(b.papers);
  ds.edges = std::move(b.edges);
  for (size_t e = 0; e < b.edge_label.size(); ++e)
    if (b.edge_label[e] == 1) ds.anomalous_edges.push_back(static_cast<int>(e));
  return ds;
}

void export_dataset(const SyntheticDataset& ds, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  CitationNetwork net = ds.network();
  net.export_files(out_dir + "/papers.jsonl", out_dir + "/citations.jsonl");

  // purpose annotations: a deterministic sample of contexts with labels
  {
    std::ofstream out(out_dir + "/annotations.jsonl");
    if (!out) throw Error("cannot open for writing: " + out_dir + "/annotations.jsonl");
    Rng rng(derive_seed(ds.config.seed, 0xA11));
    std::vector<size_t> order(ds.edges.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    size_t n = std::min(order.size(), static_cast<size_t>(ds.config.n_annotations));
    for (size_t i = 0; i < n; ++i) {
      json j;
      j["context"] = ds.edges[order[i]].context;
      j["category"] = category_name(ds.edge_purpose[order[i]]);
      out << j.dump() << "\n";
    }
  }

  {
    json manifest;
    manifest["n_papers"] = ds.papers.size();
    manifest["n_edges"] = ds.edges.size();
    manifest["n_anomalous"] = ds.anomalous_edges.size();
    json anomalous = json::array();
    for (int e : ds.anomalous_edges) {
      json rec;
      rec["src"] = ds.edges[static_cast<size_t>(e)].src;
      rec["dst"] = ds.edges[static_cast<size_t>(e)].dst;
      anomalous.push_back(rec);
    }
    manifest["anomalous_edges"] = anomalous;
    manifest["seed"] = ds.config.seed;
    std::ofstream out(out_dir + "/manifest.json");
    if (!out) throw Error("cannot open for writing: " + out_dir + "/manifest.json");
    out << manifest.dump(2) << "\n";
  }
}

std::vector<Annotation> load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open annotations file: " + path);
  std::vector<Annotation> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(path + ":" + std::to_string(line_no) + ": parse error: " + e.what());
    }
    Annotation a;
    a.context = j.at("context").get<std::string>();
    auto cat = category_from_name(j.at("category").get<std::string>());
    if (!cat)
      throw Error(path + ":" + std::to_string(line_no) + ": unknown category " +
                  j.at("category").get<std::string>());
    a.category = *cat;
    out.push_back(std::move(a));
  }
  return out;
}

GeneratorConfig generator_config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path + ": parse error: " + e.what());
  }
  GeneratorConfig cfg = default_generator_config();
  if (j.contains("cartels")) cfg.cartels.clear();
  if (j.contains("n_papers")) cfg.n_papers = j["n_papers"].get<int>();
  if (j.contains("n_journals")) cfg.n_journals = j["n_journals"].get<int>();
  if (j.contains("n_authors")) cfg.n_authors = j["n_authors"].get<int>();
  if (j.contains("n_topics")) cfg.n_topics = j["n_topics"].get<int>();
  if (j.contains("base_citation_density"))
    cfg.base_citation_density = j["base_citation_density"].get<double>();
  if (j.contains("anomaly_rate_target"))
    cfg.anomaly_rate_target = j["anomaly_rate_target"].get<double>();
  if (j.contains("purpose_mix")) {
    auto mix = j["purpose_mix"].get<std::vector<double>>();
    if (mix.size() != kNumCategories) throw Error("config: purpose_mix needs 6 entries");
    std::copy(mix.begin(), mix.end(), cfg.purpose_mix.begin());
  }
  if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
  if (j.contains("relation_overlap_fraction"))
    cfg.relation_overlap_fraction = j["relation_overlap_fraction"].get<double>();
  if (j.contains("fan_fraction")) cfg.fan_fraction = j["fan_fraction"].get<double>();
  if (j.contains("cross_topic_fraction"))
    cfg.cross_topic_fraction = j["cross_topic_fraction"].get<double>();
  if (j.contains("n_annotations")) cfg.n_annotations = j["n_annotations"].get<int>();
  if (j.contains("cartels")) {
    for (const json& c : j["cartels"]) {
      CartelSpec spec;
      spec.donor_journal = c.at("donor_journal").get<std::string>();
      spec.recipient_journal = c.at("recipient_journal").get<std::string>();
      spec.n_anomalous_papers = c.at("n_anomalous_papers").get<int>();
      spec.refs_per_anomalous_paper = c.at("refs_per_anomalous_paper").get<int>();
      spec.fraction_to_recipient = c.at("fraction_to_recipient").get<double>();
      cfg.cartels.push_back(spec);
    }
  }
  return cfg;
}

void write_generator_config(const GeneratorConfig& cfg, const std::string& path) {
  json j;
  j["n_papers"] = cfg.n_papers;
  j["n_journals"] = cfg.n_journals;
  j["n_authors"] = cfg.n_authors;
  j["n_topics"] = cfg.n_topics;
  j["base_citation_density"] = cfg.base_citation_density;
  j["anomaly_rate_target"] = cfg.anomaly_rate_target;
  j["purpose_mix"] = cfg.purpose_mix;
  j["seed"] = cfg.seed;
  j["relation_overlap_fraction"] = cfg.relation_overlap_fraction;
  j["fan_fraction"] = cfg.fan_fraction;
  j["cross_topic_fraction"] = cfg.cross_topic_fraction;
  j["n_annotations"] = cfg.n_annotations;
  json cartels = json::array();
  for (const CartelSpec& c : cfg.cartels) {
    json spec;
    spec["donor_journal"] = c.donor_journal;
    spec["recipient_journal"] = c.recipient_journal;
    spec["n_anomalous_papers"] = c.n_anomalous_papers;
    spec["refs_per_anomalous_paper"] = c.refs_per_anomalous_paper;
    spec["fraction_to_recipient"] = c.fraction_to_recipient;
    cartels.push_back(spec);
  }
  j["cartels"] = cartels;
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

std::vector<std::string> topic_vocabulary(const GeneratorConfig&, int topic) {
  std::vector<std::string> words;
  words.reserve(kTopicWords);
  for (int j = 0; j < kTopicWords; ++j) words.push_back(topic_word(topic, j));
  return words;
}

}  // namespace glad
