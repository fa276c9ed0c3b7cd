#include "seq2rdf/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "seq2rdf/checkpoint.hpp"
#include "seq2rdf/config.hpp"
#include "seq2rdf/corpus.hpp"
#include "seq2rdf/embeddings.hpp"
#include "seq2rdf/error.hpp"
#include "seq2rdf/eval.hpp"
#include "seq2rdf/log.hpp"
#include "seq2rdf/pipeline.hpp"
#include "seq2rdf/synthetic.hpp"
#include "seq2rdf/text.hpp"

namespace seq2rdf::cli {
namespace {

namespace fs = std::filesystem;

constexpr std::string_view kTranseKeyPrefix = "transe.";

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void apply_transe_key(TransEConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "dim") {
    cfg.dim = static_cast<std::size_t>(parse_uint(key, value));
  } else if (key == "margin") {
    cfg.margin = parse_double(key, value);
  } else if (key == "lr") {
    cfg.lr = parse_double(key, value);
  } else if (key == "epochs") {
    cfg.epochs = static_cast<std::size_t>(parse_uint(key, value));
  } else if (key == "batch_size") {
    cfg.batch_size = static_cast<std::size_t>(parse_uint(key, value));
  } else if (key == "norm") {
    cfg.norm = parse_norm(value);
  } else if (key == "seed") {
    cfg.seed = parse_uint(key, value);
  } else {
    throw Error("unknown TransE config key '" + key + "'");
  }
}

KeyValues transe_key_values(const TransEConfig& cfg) {
  return {{"transe.dim", std::to_string(cfg.dim)},
          {"transe.margin", format_double(cfg.margin)},
          {"transe.lr", format_double(cfg.lr)},
          {"transe.epochs", std::to_string(cfg.epochs)},
          {"transe.batch_size", std::to_string(cfg.batch_size)},
          {"transe.norm", std::string(norm_name(cfg.norm))},
          {"transe.seed", std::to_string(cfg.seed)}};
}

// Config files hold model keys and "transe."-prefixed keys side by side.
void apply_config_file(const fs::path& path, ModelConfig* model, TransEConfig* transe) {
  for (const auto& [key, value] : load_key_values(path)) {
    if (key.starts_with(kTranseKeyPrefix)) {
      if (transe) apply_transe_key(*transe, key.substr(kTranseKeyPrefix.size()), value);
    } else if (model) {
      model->set(key, value);
    }
  }
}

void apply_overrides(const std::vector<std::string>& overrides, ModelConfig& config) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error("--set expects key=value, got '" + item + "'");
    config.set(std::string(trim(item.substr(0, eq))), std::string(trim(item.substr(eq + 1))));
  }
}

std::vector<AnnotatedExample> all_examples(Dataset ds) {
  std::vector<AnnotatedExample> out = std::move(ds.train);
  out.insert(out.end(), ds.dev.begin(), ds.dev.end());
  out.insert(out.end(), ds.test.begin(), ds.test.end());
  return out;
}

// ---------------------------------------------------------------- build-vocab

struct BuildVocabArgs {
  std::string corpus, kg, out;
  std::size_t min_count = 1;
};

int run_build_vocab(const BuildVocabArgs& a, std::ostream& out) {
  const Dataset ds = load_dataset(a.corpus);
  if (ds.train.empty()) throw Error(a.corpus + ": no training records");
  std::vector<Triple> kg;
  if (!a.kg.empty()) kg = load_kg_triples(a.kg);
  ModelConfig cfg;
  cfg.min_count = a.min_count;
  cfg.use_word_init = false;
  const WordVocab words = training_word_vocab(ds.train, cfg, nullptr);
  const TripleVocab targets = training_triple_vocab(ds.train, kg);
  fs::create_directories(a.out);
  save_vocabs(a.out, words, targets);
  out << "words=" << words.size() << " entities=" << targets.num_entities()
      << " predicates=" << targets.num_predicates() << "\n";
  return 0;
}

// ------------------------------------------------------------------- kg-embed

struct KgEmbedArgs {
  std::string kg, out, config, log;
  TransEConfig transe;
  std::string norm = "L2";
};

int run_kg_embed(KgEmbedArgs a, const CLI::App& cmd, std::ostream& out) {
  TransEConfig cfg;
  if (!a.config.empty()) apply_config_file(a.config, nullptr, &cfg);
  auto given = [&](const char* name) { return cmd.get_option(name)->count() > 0; };
  if (given("--dim")) cfg.dim = a.transe.dim;
  if (given("--margin")) cfg.margin = a.transe.margin;
  if (given("--epochs")) cfg.epochs = a.transe.epochs;
  if (given("--seed")) cfg.seed = a.transe.seed;
  if (given("--lr")) cfg.lr = a.transe.lr;
  if (given("--batch")) cfg.batch_size = a.transe.batch_size;
  if (given("--norm")) cfg.norm = parse_norm(a.norm);
  cfg.validate();

  const auto triples = load_kg_triples(a.kg);
  const TransEResult result = transe_train(triples, cfg);
  fs::create_directories(a.out);
  save_kg_embeddings(a.out, result.embeddings);

  std::ostringstream log;
  log << format_key_values(transe_key_values(cfg));
  for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
    log << "epoch=" << e + 1 << " loss=" << fixed(result.epoch_losses[e], 9) << "\n";
  }
  const auto report = link_prediction_eval(result.embeddings, triples);
  log << "mean_rank=" << fixed(report.mean_rank, 6) << " hits@1=" << fixed(report.hits_at_1, 6)
      << " hits@3=" << fixed(report.hits_at_3, 6) << " hits@10=" << fixed(report.hits_at_10, 6)
      << " queries=" << report.queries << "\n";
  if (!a.log.empty()) write_text(a.log, log.str());
  out << log.str();
  return 0;
}

// ------------------------------------------------------------------- ds-align

struct AlignArgs {
  std::string kg, surface_forms, sentences, out, ambiguity_report;
  bool keep_ambiguous = false;
  std::size_t threads = 1;
};

int run_ds_align(const AlignArgs& a, std::ostream& out) {
  KnowledgeGraph kg = load_knowledge_graph(a.kg, a.surface_forms);
  if (a.surface_forms.empty()) kg.add_default_aliases();
  const auto sentences = load_sentences(a.sentences);
  AlignOptions options;
  options.keep_ambiguous = a.keep_ambiguous;
  options.threads = a.threads;
  const AlignmentResult result = distant_supervise(kg, sentences, options);
  save_examples(a.out, result.examples, "");
  if (!a.ambiguity_report.empty()) {
    std::ostringstream report;
    for (const auto& entry : result.ambiguous) {
      report << entry.source_id << '\t' << join(entry.tokens, " ") << '\t'
             << entry.triple.subject << '\t' << entry.triple.predicate << '\t'
             << entry.triple.object << '\n';
    }
    write_text(a.ambiguity_report, report.str());
  }
  out << "sentences=" << sentences.size() << " aligned=" << result.examples.size()
      << " ambiguous=" << result.ambiguous.size() << " unmatched=" << result.unmatched << "\n";
  return 0;
}

// ---------------------------------------------------------------------- train

struct TrainArgs {
  std::string config, train, dev, word_vectors, kg_embeddings, kg, vocab, flags, out, log;
  std::uint64_t seed = 1;
  std::size_t epochs = 0;
  std::vector<std::string> overrides;
  bool wall_time = false;
};

int run_train(const TrainArgs& a, const CLI::App& cmd, std::ostream& out, std::ostream& err) {
  ModelConfig cfg;
  if (!a.config.empty()) apply_config_file(a.config, &cfg, nullptr);
  apply_overrides(a.overrides, cfg);
  if (cmd.get_option("--flags")->count() > 0) cfg.set_flags(a.flags);
  if (cmd.get_option("--seed")->count() > 0) cfg.seed = a.seed;
  if (cmd.get_option("--epochs")->count() > 0) cfg.epochs = a.epochs;
  cfg.validate();

  Dataset ds = load_dataset(a.train);
  std::vector<AnnotatedExample> dev = a.dev.empty() ? ds.dev : load_examples(a.dev);
  if (ds.train.empty()) throw Error(a.train + ": no training records");

  std::optional<VectorFile> vectors;
  if (!a.word_vectors.empty()) vectors = read_vector_file(a.word_vectors);
  std::optional<KgEmbeddings> emb;
  if (!a.kg_embeddings.empty()) emb = load_kg_embeddings(a.kg_embeddings);
  if (cfg.use_word_init && !vectors) {
    throw Error("flag W needs pre-trained word vectors (pass --word-vectors)");
  }
  if (cfg.use_kg_init && !emb) {
    throw Error("flag G needs KG embeddings (run kg-embed, then pass --kg-embeddings)");
  }
  std::vector<Triple> kg;
  if (!a.kg.empty()) kg = load_kg_triples(a.kg);
  std::optional<WordVocab> words;
  std::optional<TripleVocab> targets;
  if (!a.vocab.empty()) {
    words = load_word_vocab(a.vocab);
    targets = load_triple_vocab(a.vocab);
  }

  auto log_out = a.log.empty() ? std::optional<std::ofstream>() : open_output(a.log);
  auto emit = [&](const std::string& line) {
    out << line << "\n";
    if (log_out) *log_out << line << "\n";
  };
  for (const auto& [key, value] : cfg.to_key_values()) emit("config." + key + "=" + value);

  PipelineInputs inputs;
  inputs.train = ds.train;
  inputs.dev = dev;
  inputs.kg = kg;
  inputs.word_vectors = vectors ? &*vectors : nullptr;
  inputs.kg_embeddings = emb ? &*emb : nullptr;
  inputs.words = words ? &*words : nullptr;
  inputs.targets = targets ? &*targets : nullptr;
  const PipelineResult result = train_pipeline(
      inputs, cfg, [&](const EpochRecord& rec) { emit(format_epoch_record(rec, a.wall_time)); });

  if (cfg.use_word_init) emit("word_vector_coverage=" + fixed(result.word_coverage, 6));
  if (cfg.use_kg_init) emit("kg_embedding_coverage=" + fixed(result.kg_coverage, 6));
  emit("best_epoch=" + std::to_string(result.training.best_epoch) +
       " best_dev_f1=" + fixed(result.training.best_dev_f1, 6) +
       " dropped_train=" + std::to_string(result.training.dropped_train) +
       " dropped_dev=" + std::to_string(result.training.dropped_dev));
  save_checkpoint(a.out, result.model);
  if (result.training.diverged) {
    emit("diverged: " + result.training.diagnostic);
    err << "error: training diverged (" << result.training.diagnostic
        << "); last good checkpoint kept at " << a.out << "\n";
    return 1;
  }
  return 0;
}

// ----------------------------------------------------------------------- eval

struct EvalArgs {
  std::string checkpoint, test, kg, report;
  std::size_t beam = 1;
  std::size_t threads = 1;
};

int run_eval(const EvalArgs& a, std::ostream& out) {
  const Model model = load_checkpoint(a.checkpoint);
  Dataset ds = load_dataset(a.test);
  const auto examples = ds.test.empty() ? all_examples(std::move(ds)) : ds.test;
  if (examples.empty()) throw Error(a.test + ": no evaluation records");
  std::vector<Triple> kg;
  if (!a.kg.empty()) kg = load_kg_triples(a.kg);
  const EvalReport report = evaluate_model(model, examples, kg, a.beam, a.threads);
  if (!a.report.empty()) write_text(a.report, format_report_records(report));
  out << format_report_table(report);
  return 0;
}

// ------------------------------------------------------------------ translate

void print_decode(const DecodeResult& r, std::span<const std::string> tokens, const Model& model,
                  bool details, std::ostream& out) {
  const Triple t = decode_triple(r.ids, model.targets);
  out << t.subject << '\t' << t.predicate << '\t' << t.object << "\n";
  if (!details) return;
  static constexpr const char* kSlots[3] = {"subject", "predicate", "object"};
  for (std::size_t k = 0; k < 3; ++k) {
    out << "  step " << k + 1 << " " << kSlots[k] << " logp=" << fixed(r.step_log_probs[k], 6);
    if (k < r.attention.size() && !r.attention[k].empty()) {
      const auto& w = r.attention[k];
      const auto best = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
      out << " attend=" << (best < tokens.size() ? tokens[best] : std::string("?")) << " ("
          << fixed(w[best], 3) << ")";
    }
    out << "\n";
  }
  out << "  total logp=" << fixed(r.total_log_prob, 6) << "\n";
}

DecodeResult translate_one(std::span<const std::string> tokens, const Model& model,
                           std::size_t beam) {
  return beam <= 1 ? translate_greedy(tokens, model) : translate_beam(tokens, model, beam).front();
}

void warn_oov(const DecodeResult& r, std::ostream& err) {
  if (r.unknown_tokens > 0) {
    err << "warning: " << r.unknown_tokens << " of " << r.source_tokens
        << " tokens are out of vocabulary\n";
  }
}

struct TranslateArgs {
  std::string checkpoint, text;
  bool interactive = false;
  std::size_t beam = 1;
};

int run_translate(const TranslateArgs& a, std::istream& in, std::ostream& out, std::ostream& err) {
  const Model model = load_checkpoint(a.checkpoint);
  if (!a.interactive) {
    const auto tokens = tokenize(a.text);
    if (tokens.empty()) throw Error("--text has no tokens");
    const DecodeResult r = translate_one(tokens, model, a.beam);
    warn_oov(r, err);
    print_decode(r, tokens, model, false, out);
    return 0;
  }
  std::string line;
  while (true) {
    out << "> " << std::flush;
    if (!std::getline(in, line)) break;
    if (trim(line).empty()) continue;
    const auto tokens = tokenize(line);
    if (tokens.empty()) {
      err << "warning: no tokens in input, skipped\n";
      continue;
    }
    try {
      const DecodeResult r = translate_one(tokens, model, a.beam);
      warn_oov(r, err);
      print_decode(r, tokens, model, true, out);
    } catch (const Error& e) {
      err << "warning: " << e.what() << "\n";
    }
  }
  out << "\n";
  return 0;
}

// --------------------------------------------------------------------- ablate

struct AblateArgs {
  std::string dataset, kg, word_vectors, config, out, configs = "none;A;A,W;A,W,G";
  std::string seeds = "1,2,3,4,5";
  std::uint64_t data_seed = 1;
  std::size_t epochs = 40;
  std::size_t patience = 10;
  std::size_t threads = 1;
  std::vector<std::string> overrides;
};

int run_ablate(const AblateArgs& a, const CLI::App& cmd, std::ostream& out, std::ostream& err) {
  AblationOptions options;
  options.base.epochs = a.epochs;
  options.base.patience = a.patience;
  if (!a.config.empty()) apply_config_file(a.config, &options.base, &options.transe);
  apply_overrides(a.overrides, options.base);
  if (cmd.get_option("--epochs")->count() > 0) options.base.epochs = a.epochs;
  if (cmd.get_option("--patience")->count() > 0) options.base.patience = a.patience;
  options.threads = a.threads;
  options.flag_sets.clear();
  for (const auto& part : split(a.configs, ';')) {
    if (!trim(part).empty()) options.flag_sets.emplace_back(trim(part));
  }
  if (options.flag_sets.empty()) throw Error("--configs lists no flag combinations");
  options.seeds.clear();
  for (const auto& part : split(a.seeds, ',')) options.seeds.push_back(parse_uint("seeds", trim(part)));

  AblationDataset d;
  if (a.dataset.empty()) {
    AblationCorpusOptions synth;
    synth.word_dim = options.base.word_dim;
    synth.seed = a.data_seed;
    SyntheticCorpus corpus = make_ablation_corpus(synth);
    d = {"synthetic", std::move(corpus.dataset), std::move(corpus.kg),
         std::move(corpus.word_vectors)};
  } else {
    d.name = fs::path(a.dataset).stem().string();
    d.dataset = load_dataset(a.dataset);
    if (d.dataset.test.empty()) {
      throw Error(a.dataset + ": no records with \"split\": \"test\" to evaluate on");
    }
    if (!a.kg.empty()) d.kg = load_kg_triples(a.kg);
    if (!a.word_vectors.empty()) d.word_vectors = read_vector_file(a.word_vectors);
    for (const auto& flags : options.flag_sets) {
      ModelConfig probe;
      probe.set_flags(flags);
      if (probe.use_word_init && a.word_vectors.empty()) {
        throw Error("configuration " + flags + " needs --word-vectors");
      }
      if (probe.use_kg_init && a.kg.empty()) throw Error("configuration " + flags + " needs --kg");
    }
  }
  const AblationGrid grid = run_ablation(std::span(&d, 1), options,
                                         [&](const std::string& line) { err << line << "\n"; });
  const std::string text = format_ablation_grid(grid);
  if (!a.out.empty()) write_text(a.out, text);
  out << text;
  return 0;
}

// ---------------------------------------------------------------------- synth

struct SynthArgs {
  std::string kind = "memorization", out;
  std::uint64_t seed = 1;
  std::size_t word_dim = 64;
};

int run_synth(const SynthArgs& a, std::ostream& out) {
  SyntheticCorpus corpus;
  if (a.kind == "memorization") {
    MemorizationOptions o;
    o.seed = a.seed;
    o.word_dim = a.word_dim;
    corpus = make_memorization_corpus(o);
  } else if (a.kind == "ablation") {
    AblationCorpusOptions o;
    o.seed = a.seed;
    o.word_dim = a.word_dim;
    corpus = make_ablation_corpus(o);
  } else if (a.kind == "capital") {
    corpus.dataset.train.push_back(capital_example());
    corpus.kg = {{"dbr:Germany", "dbo:capital", "dbr:Berlin"},
                 {"dbr:France", "dbo:capital", "dbr:Paris"}};
    corpus.surface_forms = {{"dbr:Germany", "Germany"}, {"dbr:Berlin", "Berlin"},
                            {"dbr:France", "France"},   {"dbr:Paris", "Paris"}};
  } else {
    throw Error("unknown corpus kind '" + a.kind + "' (memorization, ablation, capital)");
  }
  const fs::path dir(a.out);
  fs::create_directories(dir);
  std::ostringstream data, sentences, surface;
  auto add = [&](const std::vector<AnnotatedExample>& xs, const std::string& split) {
    for (const auto& ex : xs) {
      data << example_to_json_line(ex, split) << "\n";
      sentences << join(ex.tokens, " ") << "\n";
    }
  };
  add(corpus.dataset.train, "train");
  add(corpus.dataset.dev, "dev");
  add(corpus.dataset.test, "test");
  for (const auto& [entity, alias] : corpus.surface_forms) surface << entity << '\t' << alias << "\n";
  write_text(dir / "dataset.jsonl", data.str());
  write_text(dir / "sentences.txt", sentences.str());
  write_text(dir / "surface_forms.tsv", surface.str());
  save_kg_triples(dir / "kg.tsv", corpus.kg);
  if (!corpus.word_vectors.tokens.empty()) {
    write_vector_file(dir / "word_vectors.txt", corpus.word_vectors.tokens,
                      corpus.word_vectors.vectors);
  }
  out << "train=" << corpus.dataset.train.size() << " dev=" << corpus.dataset.dev.size()
      << " test=" << corpus.dataset.test.size() << " kg=" << corpus.kg.size() << "\n";
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Translate sentences into knowledge-graph triples.", "seq2rdf"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  BuildVocabArgs vocab_args;
  auto* vocab_cmd = app.add_subcommand("build-vocab", "Build word and triple vocabularies");
  vocab_cmd->add_option("--corpus", vocab_args.corpus, "Annotated JSONL corpus")->required();
  vocab_cmd->add_option("--kg", vocab_args.kg, "KG triples (TSV)");
  vocab_cmd->add_option("--out", vocab_args.out, "Output directory")->required();
  vocab_cmd->add_option("--min-count", vocab_args.min_count, "Minimum word frequency");

  KgEmbedArgs kg_args;
  auto* kg_cmd = app.add_subcommand("kg-embed", "Train TransE embeddings on a KG");
  kg_cmd->add_option("--kg", kg_args.kg, "KG triples (TSV)")->required();
  kg_cmd->add_option("--out", kg_args.out, "Output directory")->required();
  kg_cmd->add_option("--config", kg_args.config, "key=value file (transe.* keys)");
  kg_cmd->add_option("--dim", kg_args.transe.dim, "Embedding dimension");
  kg_cmd->add_option("--margin", kg_args.transe.margin, "Hinge margin");
  kg_cmd->add_option("--epochs", kg_args.transe.epochs, "Training epochs");
  kg_cmd->add_option("--seed", kg_args.transe.seed, "Random seed");
  kg_cmd->add_option("--lr", kg_args.transe.lr, "SGD learning rate");
  kg_cmd->add_option("--batch", kg_args.transe.batch_size, "Mini-batch size");
  kg_cmd->add_option("--norm", kg_args.norm, "Distance norm (L1 or L2)");
  kg_cmd->add_option("--log", kg_args.log, "Write the training log here");

  AlignArgs align_args;
  auto* align_cmd = app.add_subcommand("ds-align", "Label raw sentences by distant supervision");
  align_cmd->add_option("--kg", align_args.kg, "KG triples (TSV)")->required();
  align_cmd->add_option("--surface-forms", align_args.surface_forms,
                        "entity<TAB>alias file; defaults to aliases from entity names");
  align_cmd->add_option("--sentences", align_args.sentences, "One sentence per line")->required();
  align_cmd->add_option("--out", align_args.out, "Output JSONL")->required();
  align_cmd->add_flag("--keep-ambiguous", align_args.keep_ambiguous,
                      "Emit every matching triple for ambiguous sentences");
  align_cmd->add_option("--ambiguity-report", align_args.ambiguity_report,
                        "Write ambiguous matches here");
  align_cmd->add_option("--threads", align_args.threads, "Worker threads");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train the sentence-to-triple model");
  train_cmd->add_option("--config", train_args.config, "key=value config file");
  train_cmd->add_option("--train", train_args.train, "Training JSONL")->required();
  train_cmd->add_option("--dev", train_args.dev, "Dev JSONL (default: dev split of --train)");
  train_cmd->add_option("--word-vectors", train_args.word_vectors, "Word vectors (text format)");
  train_cmd->add_option("--kg-embeddings", train_args.kg_embeddings, "kg-embed output directory");
  train_cmd->add_option("--kg", train_args.kg, "KG triples widening the target vocabulary");
  train_cmd->add_option("--vocab", train_args.vocab, "build-vocab output directory");
  train_cmd->add_option("--flags", train_args.flags, "Model flags, e.g. A,W,G or none");
  train_cmd->add_option("--seed", train_args.seed, "Random seed");
  train_cmd->add_option("--epochs", train_args.epochs, "Maximum epochs");
  train_cmd->add_option("--set", train_args.overrides, "Override a config key (key=value)");
  train_cmd->add_option("--out", train_args.out, "Checkpoint path")->required();
  train_cmd->add_option("--log", train_args.log, "Write the training log here");
  train_cmd->add_flag("--wall-time", train_args.wall_time, "Add wall time to epoch records");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Exact-match evaluation");
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Model checkpoint")->required();
  eval_cmd->add_option("--test", eval_args.test, "Test JSONL (test split if present)")->required();
  eval_cmd->add_option("--kg", eval_args.kg, "KG triples for the error taxonomy");
  eval_cmd->add_option("--report", eval_args.report, "Write key=value report here");
  eval_cmd->add_option("--beam", eval_args.beam, "Beam width (1 = greedy)");
  eval_cmd->add_option("--threads", eval_args.threads, "Worker threads");

  TranslateArgs tr_args;
  auto* tr_cmd = app.add_subcommand("translate", "Translate sentences into triples");
  tr_cmd->add_option("--checkpoint", tr_args.checkpoint, "Model checkpoint")->required();
  auto* text_opt = tr_cmd->add_option("--text", tr_args.text, "Sentence to translate");
  auto* inter_opt = tr_cmd->add_flag("--interactive", tr_args.interactive, "Read sentences from stdin");
  text_opt->excludes(inter_opt);
  tr_cmd->add_option("--beam", tr_args.beam, "Beam width (1 = greedy)");

  AblateArgs ab_args;
  auto* ab_cmd = app.add_subcommand("ablate", "Train and compare flag combinations");
  ab_cmd->add_option("--dataset", ab_args.dataset,
                     "JSONL with train/dev/test splits (default: generated corpus)");
  ab_cmd->add_option("--kg", ab_args.kg, "KG triples (needed for G)");
  ab_cmd->add_option("--word-vectors", ab_args.word_vectors, "Word vectors (needed for W)");
  ab_cmd->add_option("--config", ab_args.config, "key=value config file");
  ab_cmd->add_option("--configs", ab_args.configs, "Semicolon-separated flag combinations");
  ab_cmd->add_option("--seeds", ab_args.seeds, "Comma-separated seeds");
  ab_cmd->add_option("--data-seed", ab_args.data_seed, "Seed of the generated corpus");
  ab_cmd->add_option("--epochs", ab_args.epochs, "Maximum epochs");
  ab_cmd->add_option("--patience", ab_args.patience, "Early-stopping patience (0 = off)");
  ab_cmd->add_option("--set", ab_args.overrides, "Override a config key (key=value)");
  ab_cmd->add_option("--threads", ab_args.threads, "Evaluation threads");
  ab_cmd->add_option("--out", ab_args.out, "Write the grid here");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Write a generated corpus");
  synth_cmd->add_option("--kind", synth_args.kind, "memorization, ablation or capital");
  synth_cmd->add_option("--seed", synth_args.seed, "Random seed");
  synth_cmd->add_option("--word-dim", synth_args.word_dim, "Word vector dimension");
  synth_cmd->add_option("--out", synth_args.out, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (tr_cmd->parsed() && tr_args.text.empty() && !tr_args.interactive) {
      throw CLI::ValidationError("translate needs --text or --interactive");
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return 2;
  }

  if (verbose) log::set_level(log::Level::kInfo);
  try {
    if (vocab_cmd->parsed()) return run_build_vocab(vocab_args, out);
    if (kg_cmd->parsed()) return run_kg_embed(kg_args, *kg_cmd, out);
    if (align_cmd->parsed()) return run_ds_align(align_args, out);
    if (train_cmd->parsed()) return run_train(train_args, *train_cmd, out, err);
    if (eval_cmd->parsed()) return run_eval(eval_args, out);
    if (tr_cmd->parsed()) return run_translate(tr_args, in, out, err);
    if (ab_cmd->parsed()) return run_ablate(ab_args, *ab_cmd, out, err);
    if (synth_cmd->parsed()) return run_synth(synth_args, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace seq2rdf::cli
