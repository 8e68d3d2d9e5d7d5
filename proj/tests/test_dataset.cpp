#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <regex>
#include <set>

#include "gazekex/dataset.hpp"
#include "gazekex/rng.hpp"

using namespace gazekex;

namespace {

std::string join_spaces(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += " ";
        out += tokens[i];
    }
    return out;
}

std::string concat(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) out += p;
    return out;
}

std::string tags_string(const std::vector<Tag>& tags) {
    std::string s;
    for (Tag t : tags) s += tag_char(t);
    return s;
}

// Independent decode oracle built on std::regex: validity is a whole-string
// match of (N|S|BM*E)*; valid strings are parsed by regex iteration, invalid
// ones by scanning maximal non-N runs with a plain index loop.
std::vector<Span> oracle_decode(const std::string& s) {
    static const std::regex valid_re("^(?:N|S|BM*E)*$");
    std::vector<Span> spans;
    if (std::regex_match(s, valid_re)) {
        static const std::regex span_re("S|BM*E");
        for (auto it = std::sregex_iterator(s.begin(), s.end(), span_re);
             it != std::sregex_iterator(); ++it) {
            spans.emplace_back(it->position(), it->position() + it->length());
        }
        return spans;
    }
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == 'N') {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && s[j] != 'N') ++j;
        spans.emplace_back(i, j);
        i = j;
    }
    return spans;
}

}  // namespace

TEST_CASE("tokenizer splits words and peels punctuation", "[dataset]") {
    REQUIRE(tokenize("hello world") == std::vector<std::string>{"hello", "world"});
    REQUIRE(tokenize("wow!") == std::vector<std::string>{"wow", "!"});
    REQUIRE(tokenize("(hello)") == std::vector<std::string>{"(", "hello", ")"});
    REQUIRE(tokenize("wait...") == std::vector<std::string>{"wait", ".", ".", "."});
    REQUIRE(tokenize("don't stop") == std::vector<std::string>{"don't", "stop"});
    REQUIRE(tokenize("") == std::vector<std::string>{});
    REQUIRE(tokenize("   spaced\tout  ") == std::vector<std::string>{"spaced", "out"});
}

TEST_CASE("tokenizer protects urls mentions hashtags emoticons", "[dataset]") {
    REQUIRE(tokenize("see https://a.example/x now") ==
            std::vector<std::string>{"see", "https://a.example/x", "now"});
    REQUIRE(tokenize("ask @some_user1 today") ==
            std::vector<std::string>{"ask", "@some_user1", "today"});
    REQUIRE(tokenize("go #Vote2024 now!") ==
            std::vector<std::string>{"go", "#Vote2024", "now", "!"});
    REQUIRE(tokenize("nice :) right?") == std::vector<std::string>{"nice", ":)", "right", "?"});
    REQUIRE(tokenize("check www.example.org.") ==
            std::vector<std::string>{"check", "www.example.org", "."});
    // Trailing punctuation still peels off protected cores.
    REQUIRE(tokenize("(#tag)") == std::vector<std::string>{"(", "#tag", ")"});
    REQUIRE(tokenize("@user,") == std::vector<std::string>{"@user", ","});
}

TEST_CASE("tokenizer is idempotent on its own output", "[dataset]") {
    const std::vector<std::string> samples = {
        "Vote for #WhiteHouse today!!",
        "wow... @user said (really?) https://t.co/abc :)",
        "don't miss www.example.org, it's #1",
        "a,b;c:d",
        "!!!",
        "#hash @m :-( end.",
    };
    for (const auto& text : samples) {
        auto once = tokenize(text);
        auto twice = tokenize(join_spaces(once));
        REQUIRE(twice == once);
    }
}

TEST_CASE("single-case hashtags pass through unsegmented", "[dataset]") {
    REQUIRE(segment_hashtag("TCOT") == std::vector<std::string>{"TCOT"});
    REQUIRE(segment_hashtag("election") == std::vector<std::string>{"election"});
    REQUIRE(segment_hashtag("covid19") == std::vector<std::string>{"covid19"});
    REQUIRE(segment_hashtag("VOTE2024") == std::vector<std::string>{"VOTE2024"});
}

TEST_CASE("mixed-case hashtags segment by the two patterns", "[dataset]") {
    REQUIRE(segment_hashtag("WhiteHouse") == std::vector<std::string>{"White", "House"});
    REQUIRE(segment_hashtag("iPhoneRelease") == std::vector<std::string>{"i", "Phone", "Release"});
    // Greedy capital run absorbs into the following lowercase word.
    REQUIRE(segment_hashtag("ABCNews") == std::vector<std::string>{"ABCNews"});
    // Trailing capital run falls to the second pattern.
    REQUIRE(segment_hashtag("VoteUSA") == std::vector<std::string>{"Vote", "USA"});
    REQUIRE(segment_hashtag("Covid19") == std::vector<std::string>{"Covid", "19"});
    REQUIRE(segment_hashtag("Vote2024Now") == std::vector<std::string>{"Vote", "2024", "Now"});
    REQUIRE_THROWS_AS(segment_hashtag(""), EmptyInputError);
}

TEST_CASE("segmentation always concatenates back to its input", "[dataset]") {
    Rng rng(55, 0);
    const std::string alphabet = "abcXYZ019_";
    for (int trial = 0; trial < 500; ++trial) {
        std::string tag;
        const std::size_t len = 1 + rng.next_below(12);
        for (std::size_t i = 0; i < len; ++i) {
            tag += alphabet[rng.next_below(alphabet.size())];
        }
        REQUIRE(concat(segment_hashtag(tag)) == tag);
    }
}

TEST_CASE("span encoding produces the documented tag shapes", "[dataset]") {
    REQUIRE(tags_string(spans_to_tags({{2, 3}}, 5)) == "NNSNN");
    REQUIRE(tags_string(spans_to_tags({{0, 3}}, 3)) == "BME");
    REQUIRE(tags_string(spans_to_tags({{0, 2}}, 4)) == "BENN");
    REQUIRE(tags_string(spans_to_tags({}, 3)) == "NNN");
    REQUIRE(tags_string(spans_to_tags({{0, 1}, {2, 4}}, 4)) == "SNBE");
    REQUIRE_THROWS_AS(spans_to_tags({{2, 2}}, 5), ContractError);
    REQUIRE_THROWS_AS(spans_to_tags({{3, 6}}, 5), ContractError);
    REQUIRE_THROWS_AS(spans_to_tags({{0, 2}, {1, 3}}, 5), ContractError);
}

TEST_CASE("valid tag sequences decode exactly", "[dataset]") {
    auto decode = [](const std::string& s) {
        std::vector<Tag> tags;
        for (char c : s) tags.push_back(tag_from_char(c));
        return tags_to_spans(tags);
    };
    REQUIRE(decode("NNSNN") == std::vector<Span>{{2, 3}});
    REQUIRE(decode("BME") == std::vector<Span>{{0, 3}});
    REQUIRE(decode("SS") == std::vector<Span>{{0, 1}, {1, 2}});
    REQUIRE(decode("BE") == std::vector<Span>{{0, 2}});
    REQUIRE(decode("NNN").empty());
    REQUIRE(decode("").empty());
}

TEST_CASE("invalid tag sequences repair to maximal non-Not runs", "[dataset]") {
    auto decode = [](const std::string& s) {
        std::vector<Tag> tags;
        for (char c : s) tags.push_back(tag_from_char(c));
        return tags_to_spans(tags);
    };
    REQUIRE(decode("MEN") == std::vector<Span>{{0, 2}});
    REQUIRE(decode("BMN") == std::vector<Span>{{0, 2}});
    REQUIRE(decode("EB") == std::vector<Span>{{0, 2}});
    REQUIRE(decode("NBSN") == std::vector<Span>{{1, 3}});
    REQUIRE(decode("MNM") == std::vector<Span>{{0, 1}, {2, 3}});
}

TEST_CASE("encode-decode round trip over fuzzed span sets", "[dataset][property]") {
    Rng rng(101, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t length = 1 + rng.next_below(12);
        std::vector<Span> spans;
        std::size_t pos = 0;
        while (pos < length) {
            if (rng.next_below(3) == 0) {
                std::size_t span_len = 1 + rng.next_below(std::min<std::size_t>(4, length - pos));
                spans.emplace_back(pos, pos + span_len);
                pos += span_len + 1;  // gap so spans stay distinguishable
            } else {
                ++pos;
            }
        }
        auto tags = spans_to_tags(spans, length);
        REQUIRE(tags_to_spans(tags) == spans);
    }
}

TEST_CASE("fuzzed tag sequences decode like the regex oracle", "[dataset][property]") {
    Rng rng(202, 0);
    const char alphabet[] = {'S', 'B', 'M', 'E', 'N'};
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t length = rng.next_below(14);
        std::string s;
        std::vector<Tag> tags;
        for (std::size_t i = 0; i < length; ++i) {
            char c = alphabet[rng.next_below(5)];
            s += c;
            tags.push_back(tag_from_char(c));
        }
        REQUIRE(tags_to_spans(tags) == oracle_decode(s));
    }
}

TEST_CASE("dataset keeps only single interior hashtags", "[dataset]") {
    std::vector<std::string> tweets = {
        "vote for #WhiteHouse today",            // kept
        "#leading hashtag never counts",         // boundary: first token
        "trailing hashtag not kept #end",        // boundary: last token
        "two #tags in one #post here",           // two hashtags
        "no hashtag at all",                     // zero hashtags
        "punct wrapped (#Deal) works fine",      // still interior after peeling
    };
    auto posts = build_dataset(tweets, DatasetMode::kGeneric);
    REQUIRE(posts.size() == 2);

    const Post& first = posts[0];
    REQUIRE(first.tokens == std::vector<std::string>{"vote", "for", "White", "House", "today"});
    REQUIRE(first.gold_spans == std::vector<Span>{{2, 4}});
    REQUIRE(tags_string(first.tags) == "NNBEN");

    const Post& second = posts[1];
    REQUIRE(second.tokens ==
            std::vector<std::string>{"punct", "wrapped", "(", "Deal", ")", "works", "fine"});
    REQUIRE(second.gold_spans == std::vector<Span>{{3, 4}});
    REQUIRE(second.tags[3] == Tag::kSingle);
}

TEST_CASE("every built post satisfies its own invariants", "[dataset]") {
    std::vector<std::string> tweets = {
        "morning run at the #CentralPark loop",
        "breaking story on #ABCNews tonight",
        "just got the #iPhoneRelease news early",
    };
    auto posts = build_dataset(tweets, DatasetMode::kGeneric);
    REQUIRE(posts.size() == 3);
    for (const auto& post : posts) {
        REQUIRE_NOTHROW(post.validate());
        REQUIRE(post.gold_spans.size() == 1);
    }
    // Whole-match greedy keeps ABCNews as a single gold token.
    REQUIRE(posts[1].gold_spans[0].second - posts[1].gold_spans[0].first == 1);
    // Zero-capital prefix yields a three-token gold phrase.
    REQUIRE(posts[2].gold_spans[0].second - posts[2].gold_spans[0].first == 3);
}

TEST_CASE("gold phrases are lowercased token sequences", "[dataset]") {
    auto posts = build_dataset({"vote for #WhiteHouse today"}, DatasetMode::kGeneric);
    REQUIRE(posts.size() == 1);
    auto phrases = posts[0].gold_phrases();
    REQUIRE(phrases.size() == 1);
    REQUIRE(phrases[0] == std::vector<std::string>{"white", "house"});
}

TEST_CASE("split sizes follow rounded cumulative ratios", "[dataset]") {
    std::vector<Post> posts(10);
    for (std::size_t i = 0; i < posts.size(); ++i) {
        posts[i].tokens = {"t" + std::to_string(i)};
        posts[i].tags = {Tag::kNot};
    }
    auto split = split_dataset(posts, {0.8, 0.1, 0.1}, 13);
    REQUIRE(split.train.size() == 8);
    REQUIRE(split.dev.size() == 1);
    REQUIRE(split.test.size() == 1);
}

TEST_CASE("split is a seed-deterministic partition", "[dataset]") {
    std::vector<Post> posts(37);
    for (std::size_t i = 0; i < posts.size(); ++i) {
        posts[i].tokens = {"tok" + std::to_string(i)};
        posts[i].tags = {Tag::kNot};
    }
    auto a = split_dataset(posts, {0.6, 0.2, 0.2}, 99);
    auto b = split_dataset(posts, {0.6, 0.2, 0.2}, 99);

    auto names = [](const DatasetSplit& s) {
        std::vector<std::string> out;
        for (const auto* part : {&s.train, &s.dev, &s.test}) {
            for (const auto& p : *part) out.push_back(p.tokens[0]);
        }
        return out;
    };
    REQUIRE(names(a) == names(b));
    REQUIRE(a.train.size() + a.dev.size() + a.test.size() == posts.size());

    auto flat = names(a);
    std::set<std::string> seen(flat.begin(), flat.end());
    REQUIRE(seen.size() == posts.size());

    auto c = split_dataset(posts, {0.6, 0.2, 0.2}, 100);
    REQUIRE(names(c) != names(a));
}

TEST_CASE("bad split ratios are rejected", "[dataset]") {
    std::vector<Post> posts(4);
    for (auto& p : posts) {
        p.tokens = {"x"};
        p.tags = {Tag::kNot};
    }
    REQUIRE_THROWS_AS(split_dataset(posts, {0.5, 0.2, 0.2}, 1), ConfigError);
    REQUIRE_THROWS_AS(split_dataset(posts, {1.2, -0.1, -0.1}, 1), ConfigError);
}

TEST_CASE("posts round-trip through json lines", "[dataset]") {
    auto posts = build_dataset({"vote for #WhiteHouse today", "see the #ABCNews desk now"},
                               DatasetMode::kGeneric);
    auto dir = std::filesystem::temp_directory_path() / "gazekex_test";
    std::filesystem::create_directories(dir);
    auto path = dir / "posts.jsonl";
    write_posts_jsonl(path.string(), posts);
    auto loaded = read_posts_jsonl(path.string());
    REQUIRE(loaded.size() == posts.size());
    for (std::size_t i = 0; i < posts.size(); ++i) {
        REQUIRE(loaded[i].tokens == posts[i].tokens);
        REQUIRE(loaded[i].gold_spans == posts[i].gold_spans);
        REQUIRE(loaded[i].tags == posts[i].tags);
    }
}

TEST_CASE("malformed post records carry a line number", "[dataset]") {
    auto dir = std::filesystem::temp_directory_path() / "gazekex_test";
    std::filesystem::create_directories(dir);
    auto path = dir / "badposts.jsonl";

    std::ofstream(path) << "{\"tokens\": [\"a\"]}\n";
    REQUIRE_THROWS_AS(read_posts_jsonl(path.string()), ParseError);

    std::ofstream(path) << "{\"tokens\": [\"a\"], \"gold_spans\": [[0, 5]]}\n";
    REQUIRE_THROWS_AS(read_posts_jsonl(path.string()), ParseError);

    std::ofstream(path) << "not json\n";
    REQUIRE_THROWS_AS(read_posts_jsonl(path.string()), ParseError);
}

TEST_CASE("tweets load from plain lines or json records", "[dataset]") {
    auto dir = std::filesystem::temp_directory_path() / "gazekex_test";
    std::filesystem::create_directories(dir);
    auto path = dir / "tweets.txt";
    std::ofstream(path) << "plain tweet #One here\n"
                        << "{\"id\": \"42\", \"text\": \"json tweet #Two here\"}\n";
    auto texts = read_tweets(path.string());
    REQUIRE(texts.size() == 2);
    REQUIRE(texts[0] == "plain tweet #One here");
    REQUIRE(texts[1] == "json tweet #Two here");

    std::ofstream(path) << "{\"id\": \"x\"}\n";
    REQUIRE_THROWS_AS(read_tweets(path.string()), ParseError);
}

TEST_CASE("dataset mode names resolve", "[dataset]") {
    REQUIRE(dataset_mode_from_string("election-trec") == DatasetMode::kElectionTrec);
    REQUIRE(dataset_mode_from_string("general-twitter") == DatasetMode::kGeneralTwitter);
    REQUIRE(dataset_mode_from_string("generic") == DatasetMode::kGeneric);
    REQUIRE_THROWS_AS(dataset_mode_from_string("other"), ConfigError);
}
