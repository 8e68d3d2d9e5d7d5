#include "gazekex/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "catch2/catch_amalgamated.hpp"
#include "gazekex/rng.hpp"

using namespace gazekex;
using Catch::Approx;

namespace {

Post make_post(std::vector<std::string> tokens, std::vector<Span> golds) {
    Post p;
    p.tokens = std::move(tokens);
    p.gold_spans = std::move(golds);
    p.tags = spans_to_tags(p.gold_spans, p.tokens.size());
    return p;
}

std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("gazekex_eval_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("phrase keys lowercase and join with spaces", "[eval]") {
    std::vector<std::string> tokens = {"Vote", "White", "House", "now"};
    REQUIRE(phrase_key(tokens, {1, 3}) == "white house");
    REQUIRE(phrase_key(tokens, {0, 1}) == "vote");
    REQUIRE_THROWS_AS(phrase_key(tokens, {2, 2}), ContractError);
    REQUIRE_THROWS_AS(phrase_key(tokens, {3, 5}), ContractError);
}

TEST_CASE("all exact matches score perfectly", "[eval]") {
    std::vector<Post> golds = {
        make_post({"a", "b", "c"}, {{0, 2}}),
        make_post({"x", "y"}, {{1, 2}}),
    };
    std::vector<std::vector<Span>> preds = {{{0, 2}}, {{1, 2}}};
    auto r = score(golds, preds);
    REQUIRE(r.precision == 1.0);
    REQUIRE(r.recall == 1.0);
    REQUIRE(r.f1 == 1.0);
    REQUIRE(r.posts == 2);
    REQUIRE(r.predicted_spans == 2);
    REQUIRE(r.gold_spans == 2);
}

TEST_CASE("matching is case-insensitive on token sequences", "[eval]") {
    std::vector<Post> golds = {make_post({"The", "WHITE", "house"}, {{1, 3}})};
    SECTION("same span, same casing trivially matches") {
        auto r = score(golds, {{{1, 3}}});
        REQUIRE(r.f1 == 1.0);
    }
    SECTION("a different span with the same lowercased text matches") {
        std::vector<Post> g2 = {make_post({"white", "HOUSE", "vs", "White", "House"}, {{0, 2}})};
        auto r = score(g2, {{{3, 5}}});
        REQUIRE(r.precision == 1.0);
        REQUIRE(r.recall == 1.0);
    }
}

TEST_CASE("one hit one miss gives macro one half", "[eval]") {
    std::vector<Post> golds = {
        make_post({"a", "b"}, {{0, 1}}),
        make_post({"c", "d"}, {{0, 1}}),
    };
    std::vector<std::vector<Span>> preds = {{{0, 1}}, {{1, 2}}};
    auto r = score(golds, preds);
    REQUIRE(r.precision == Approx(0.5));
    REQUIRE(r.recall == Approx(0.5));
    REQUIRE(r.f1 == Approx(0.5));
}

TEST_CASE("no predictions anywhere zeroes recall and f1", "[eval]") {
    std::vector<Post> golds = {
        make_post({"a", "b"}, {{0, 1}}),
        make_post({"c", "d"}, {{1, 2}}),
    };
    std::vector<std::vector<Span>> preds = {{}, {}};
    auto r = score(golds, preds);
    REQUIRE(r.recall == 0.0);
    REQUIRE(r.f1 == 0.0);
    REQUIRE(r.precision_posts == 0);
    REQUIRE(r.precision == 0.0);
    REQUIRE(r.recall_posts == 2);
}

TEST_CASE("undefined ratios are excluded from their macro mean", "[eval]") {
    std::vector<Post> golds = {
        make_post({"a", "b"}, {{0, 1}}),
        make_post({"c", "d"}, {{0, 1}}),
    };
    SECTION("post with no predictions contributes recall 0 but no precision term") {
        std::vector<std::vector<Span>> preds = {{{0, 1}}, {}};
        auto r = score(golds, preds);
        REQUIRE(r.precision == 1.0);
        REQUIRE(r.precision_posts == 1);
        REQUIRE(r.recall == Approx(0.5));
        REQUIRE(r.recall_posts == 2);
    }
    SECTION("both empty counts as a perfect post on both axes") {
        std::vector<Post> g2 = {make_post({"a", "b"}, {}), make_post({"c", "d"}, {{0, 1}})};
        std::vector<std::vector<Span>> preds = {{}, {{0, 1}}};
        auto r = score(g2, preds);
        REQUIRE(r.precision == 1.0);
        REQUIRE(r.recall == 1.0);
        REQUIRE(r.f1 == 1.0);
    }
    SECTION("gold empty with predictions present zeroes precision, excludes recall") {
        std::vector<Post> g2 = {make_post({"a", "b"}, {})};
        std::vector<std::vector<Span>> preds = {{{0, 1}}};
        auto r = score(g2, preds);
        REQUIRE(r.precision == 0.0);
        REQUIRE(r.precision_posts == 1);
        REQUIRE(r.recall_posts == 0);
    }
}

TEST_CASE("multiset matching counts duplicates once per copy", "[eval]") {
    // Gold has two copies of "a"; predicting it once is half recall.
    std::vector<Post> golds = {make_post({"a", "x", "a"}, {{0, 1}, {2, 3}})};
    auto r = score(golds, {{{0, 1}}});
    REQUIRE(r.precision == 1.0);
    REQUIRE(r.recall == Approx(0.5));
}

TEST_CASE("score is permutation-invariant over posts", "[eval]") {
    std::vector<Post> golds;
    std::vector<std::vector<Span>> preds;
    Rng rng(17, 0);
    for (int i = 0; i < 20; ++i) {
        std::vector<std::string> tokens;
        for (int t = 0; t < 5; ++t) tokens.push_back("w" + std::to_string(rng.next_below(8)));
        golds.push_back(make_post(tokens, {{1, 3}}));
        std::size_t start = rng.next_below(4);
        preds.push_back({{start, start + 1}});
    }
    auto base = score(golds, preds);

    std::vector<std::size_t> order(golds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<Post> g2;
    std::vector<std::vector<Span>> p2;
    for (std::size_t i : order) {
        g2.push_back(golds[i]);
        p2.push_back(preds[i]);
    }
    auto shuffled = score(g2, p2);
    REQUIRE(shuffled.precision == Approx(base.precision).epsilon(1e-12));
    REQUIRE(shuffled.recall == Approx(base.recall).epsilon(1e-12));
    REQUIRE(shuffled.f1 == Approx(base.f1).epsilon(1e-12));
}

TEST_CASE("reported f1 is always the harmonic mean of reported p and r", "[eval]") {
    Rng rng(23, 0);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Post> golds;
        std::vector<std::vector<Span>> preds;
        for (int i = 0; i < 6; ++i) {
            std::vector<std::string> tokens;
            for (int t = 0; t < 4; ++t) tokens.push_back("w" + std::to_string(rng.next_below(5)));
            golds.push_back(make_post(tokens, {{0, 2}}));
            if (rng.next_below(3) == 0) {
                preds.push_back({});
            } else {
                std::size_t start = rng.next_below(3);
                preds.push_back({{start, start + rng.next_below(2) + 1}});
            }
        }
        auto r = score(golds, preds);
        const double expect =
            (r.precision + r.recall) > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
        REQUIRE(r.f1 == expect);
        REQUIRE(r.precision >= 0.0);
        REQUIRE(r.precision <= 1.0);
        REQUIRE(r.recall >= 0.0);
        REQUIRE(r.recall <= 1.0);
    }
}

TEST_CASE("misaligned score inputs are rejected", "[eval]") {
    std::vector<Post> golds = {make_post({"a"}, {})};
    REQUIRE_THROWS_AS(score(golds, {}), ContractError);
}

TEST_CASE("disagreement subset selects A-right-B-wrong posts", "[eval]") {
    std::vector<Post> golds = {
        make_post({"a", "b"}, {{0, 1}}),
        make_post({"c", "d"}, {{0, 1}}),
        make_post({"e", "f"}, {{0, 1}}),
    };
    std::vector<std::vector<Span>> right = {{{0, 1}}, {{0, 1}}, {{0, 1}}};
    std::vector<std::vector<Span>> wrong = {{{1, 2}}, {}, {{0, 2}}};

    SECTION("identical predictions give an empty subset") {
        REQUIRE(disagreement_subset(right, right, golds).empty());
        REQUIRE(disagreement_subset(wrong, wrong, golds).empty());
    }
    SECTION("A perfect, B never right selects every post") {
        auto subset = disagreement_subset(right, wrong, golds);
        REQUIRE(subset == std::vector<std::size_t>{0, 1, 2});
    }
    SECTION("swapping the arguments yields a disjoint subset") {
        std::vector<std::vector<Span>> mixed = {{{0, 1}}, {{1, 2}}, {{0, 1}}};
        auto ab = disagreement_subset(mixed, right, golds);
        auto ba = disagreement_subset(right, mixed, golds);
        std::vector<std::size_t> overlap;
        std::set_intersection(ab.begin(), ab.end(), ba.begin(), ba.end(),
                              std::back_inserter(overlap));
        REQUIRE(overlap.empty());
        REQUIRE(ba == std::vector<std::size_t>{1});
        REQUIRE(ab.empty());
    }
}

TEST_CASE("attention rank follows the descending-sort convention", "[eval]") {
    SECTION("strict maximum ranks first") {
        REQUIRE(attention_rank({0.1, 0.7, 0.2}, {1, 2}) == 1);
    }
    SECTION("uniform attention ties to the best rank") {
        REQUIRE(attention_rank({0.25, 0.25, 0.25, 0.25}, {2, 3}) == 1);
    }
    SECTION("strict minimum ranks last") {
        REQUIRE(attention_rank({0.5, 0.3, 0.2}, {2, 3}) == 3);
    }
    SECTION("multi-token mean sits between its members") {
        // mean of tokens 0,1 = 0.35; only 0.5 is strictly greater.
        REQUIRE(attention_rank({0.5, 0.2, 0.3}, {0, 2}) == 2);
    }
    SECTION("bounds are enforced") {
        REQUIRE_THROWS_AS(attention_rank({}, {0, 1}), ContractError);
        REQUIRE_THROWS_AS(attention_rank({0.5, 0.5}, {1, 3}), ContractError);
    }
}

TEST_CASE("attention rank agrees with an exhaustive sort oracle", "[eval]") {
    Rng rng(91, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.next_below(6);
        std::vector<double> att(n);
        for (auto& a : att) a = rng.uniform(0.0, 1.0);
        // Duplicates exercise the tie rule.
        if (n > 2 && rng.next_below(2) == 0) att[n - 1] = att[0];
        const std::size_t start = rng.next_below(n);
        const std::size_t len = 1 + rng.next_below(n - start);
        const Span gold{start, start + len};

        double mean = 0.0;
        for (std::size_t i = gold.first; i < gold.second; ++i) mean += att[i];
        mean /= static_cast<double>(len);
        std::vector<double> sorted = att;
        std::sort(sorted.begin(), sorted.end(), std::greater<double>());
        // Best rank for ties: first index whose value is not above the mean.
        std::size_t oracle = sorted.size() + 1;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (!(sorted[i] > mean)) {
                oracle = i + 1;
                break;
            }
        }
        REQUIRE(attention_rank(att, gold) == oracle);
    }
}

TEST_CASE("single-token rank is invariant to monotone transforms", "[eval]") {
    Rng rng(92, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.next_below(6);
        std::vector<double> att(n);
        for (auto& a : att) a = rng.uniform(0.01, 1.0);
        const std::size_t pos = rng.next_below(n);
        const Span g{pos, pos + 1};
        std::vector<double> cubed(n), shifted(n);
        for (std::size_t i = 0; i < n; ++i) {
            cubed[i] = att[i] * att[i] * att[i];
            shifted[i] = 3.0 * att[i] + 11.0;
        }
        REQUIRE(attention_rank(cubed, g) == attention_rank(att, g));
        REQUIRE(attention_rank(shifted, g) == attention_rank(att, g));
    }
}

TEST_CASE("multi-token rank survives affine reweighting", "[eval]") {
    Rng rng(93, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 3 + rng.next_below(5);
        std::vector<double> att(n), mapped(n);
        for (std::size_t i = 0; i < n; ++i) {
            att[i] = rng.uniform(0.0, 1.0);
            mapped[i] = 2.5 * att[i] + 0.75;
        }
        const std::size_t start = rng.next_below(n - 1);
        const Span gold{start, start + 2};
        REQUIRE(attention_rank(mapped, gold) == attention_rank(att, gold));
    }
}

TEST_CASE("rank records carry the gold phrase and its mean attention", "[eval]") {
    Post p = make_post({"send", "White", "House", "plans"}, {{1, 3}});
    auto rec = attention_rank_record(7, p, {0.1, 0.4, 0.2, 0.3});
    REQUIRE(rec.post_id == 7);
    REQUIRE(rec.gold_phrase == "white house");
    REQUIRE(rec.mean_attention == Approx(0.3));
    REQUIRE(rec.rank == 2);
    REQUIRE_THROWS_AS(attention_rank_record(0, p, {0.5, 0.5}), ContractError);
}

TEST_CASE("generalization subset keeps unseen gold phrases only", "[eval]") {
    std::vector<Post> train = {
        make_post({"the", "White", "House"}, {{1, 3}}),
        make_post({"vote", "now"}, {{0, 1}}),
    };
    SECTION("disjoint gold vocabularies keep every test post") {
        std::vector<Post> test = {make_post({"tax", "reform"}, {{0, 2}})};
        REQUIRE(generalization_subset(train, test) == std::vector<std::size_t>{0});
    }
    SECTION("identical golds are dropped, case-insensitively") {
        std::vector<Post> test = {
            make_post({"WHITE", "house", "today"}, {{0, 2}}),
            make_post({"tax", "reform"}, {{0, 2}}),
        };
        REQUIRE(generalization_subset(train, test) == std::vector<std::size_t>{1});
    }
    SECTION("identical gold sets give an empty subset") {
        REQUIRE(generalization_subset(train, train).empty());
    }
}

TEST_CASE("report round-trips through its record file", "[eval]") {
    EvalReport report;
    std::vector<Post> golds = {make_post({"a", "b"}, {{0, 1}}), make_post({"c"}, {{0, 1}})};
    report.runs.push_back(score(golds, {{{0, 1}}, {}}));
    report.runs.push_back(score(golds, {{{0, 1}}, {{0, 1}}}));
    finalize_means(report);
    report.ranks_a = {attention_rank_record(0, golds[0], {0.6, 0.4})};
    report.ranks_b = {attention_rank_record(0, golds[0], {0.3, 0.7})};
    report.disagreement_size = 1;
    report.generalization_size = 2;
    report.context["model_a"] = "ha";
    report.context["model_b"] = "att";

    auto dir = temp_dir("roundtrip");
    emit_report(report, dir);
    auto loaded = load_report(dir);

    REQUIRE(loaded.runs.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        REQUIRE(loaded.runs[i].precision == report.runs[i].precision);
        REQUIRE(loaded.runs[i].recall == report.runs[i].recall);
        REQUIRE(loaded.runs[i].f1 == report.runs[i].f1);
        REQUIRE(loaded.runs[i].posts == report.runs[i].posts);
        REQUIRE(loaded.runs[i].precision_posts == report.runs[i].precision_posts);
        REQUIRE(loaded.runs[i].recall_posts == report.runs[i].recall_posts);
    }
    REQUIRE(loaded.mean_precision == report.mean_precision);
    REQUIRE(loaded.mean_recall == report.mean_recall);
    REQUIRE(loaded.mean_f1 == report.mean_f1);
    REQUIRE(loaded.ranks_a.size() == 1);
    REQUIRE(loaded.ranks_a[0].gold_phrase == "a");
    REQUIRE(loaded.ranks_a[0].mean_attention == report.ranks_a[0].mean_attention);
    REQUIRE(loaded.ranks_a[0].rank == report.ranks_a[0].rank);
    REQUIRE(loaded.disagreement_size == 1);
    REQUIRE(loaded.generalization_size == 2);
    REQUIRE(loaded.context == report.context);
    std::filesystem::remove_all(dir);
}

TEST_CASE("empty report still writes valid files", "[eval]") {
    EvalReport report;
    finalize_means(report);
    auto dir = temp_dir("empty");
    emit_report(report, dir);
    auto loaded = load_report(dir);
    REQUIRE(loaded.runs.empty());
    REQUIRE(loaded.mean_f1 == 0.0);

    std::ifstream hist(dir / "ranks.tsv");
    std::string line;
    REQUIRE(std::getline(hist, line));
    REQUIRE(line == "rank\tcount_modelA\tcount_modelB");
    REQUIRE_FALSE(std::getline(hist, line));
    std::filesystem::remove_all(dir);
}

TEST_CASE("histogram rows sum to the subset sizes", "[eval]") {
    EvalReport report;
    Rng rng(55, 0);
    std::vector<Post> posts;
    for (int i = 0; i < 12; ++i) {
        posts.push_back(make_post({"t0", "t1", "t2", "t3"}, {{1, 2}}));
    }
    for (std::size_t i = 0; i < posts.size(); ++i) {
        std::vector<double> att(4);
        for (auto& a : att) a = rng.uniform(0.0, 1.0);
        report.ranks_a.push_back(attention_rank_record(i, posts[i], att));
        if (i % 2 == 0) {
            for (auto& a : att) a = rng.uniform(0.0, 1.0);
            report.ranks_b.push_back(attention_rank_record(i, posts[i], att));
        }
    }
    finalize_means(report);
    auto dir = temp_dir("hist");
    emit_report(report, dir);

    std::ifstream hist(dir / "ranks.tsv");
    std::string line;
    REQUIRE(std::getline(hist, line));
    std::size_t sum_a = 0;
    std::size_t sum_b = 0;
    while (std::getline(hist, line)) {
        auto fields = split_tabs(line);
        REQUIRE(fields.size() == 3);
        sum_a += std::stoul(fields[1]);
        sum_b += std::stoul(fields[2]);
    }
    REQUIRE(sum_a == report.ranks_a.size());
    REQUIRE(sum_b == report.ranks_b.size());
    std::filesystem::remove_all(dir);
}

TEST_CASE("loading a bad report fails loudly", "[eval]") {
    auto dir = temp_dir("bad");
    SECTION("missing file") {
        REQUIRE_THROWS_AS(load_report(dir / "absent"), IoError);
    }
    SECTION("wrong version") {
        std::ofstream out(dir / "report.json");
        out << "{\"version\": \"other-1\"}\n";
        out.close();
        REQUIRE_THROWS_AS(load_report(dir), ParseError);
    }
    SECTION("not json") {
        std::ofstream out(dir / "report.json");
        out << "not json at all\n";
        out.close();
        REQUIRE_THROWS_AS(load_report(dir), ParseError);
    }
    std::filesystem::remove_all(dir);
}
