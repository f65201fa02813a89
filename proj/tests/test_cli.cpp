#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <regex>
#include <string>
#include <sys/wait.h>
#include <vector>

/*
 * Drives the installed binary end to end through popen.  QPOLYA_CLI_PATH is
 * injected by the build; stderr is dropped since only codes and stdout are
 * contractual.
 */

struct CliResult {
	int code;
	std::string out;
};

static CliResult run_cli(const std::string& args) {
	std::string cmd = std::string(QPOLYA_CLI_PATH) + " " + args + " 2>/dev/null";
	FILE* pipe = popen(cmd.c_str(), "r");
	REQUIRE(pipe != nullptr);
	std::string out;
	char buf[4096];
	size_t got;
	while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0)
		out.append(buf, got);
	int status = pclose(pipe);
	return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

static std::vector<std::string> lines_of(const std::string& text) {
	std::vector<std::string> lines;
	size_t start = 0;
	while (start < text.size()) {
		size_t end = text.find('\n', start);
		if (end == std::string::npos)
			end = text.size();
		lines.push_back(text.substr(start, end - start));
		start = end + 1;
	}
	return lines;
}

static std::string meta_value(const std::string& out, const std::string& key) {
	for (const std::string& line : lines_of(out)) {
		std::string prefix = "# " + key + "=";
		if (line.rfind(prefix, 0) == 0)
			return line.substr(prefix.size());
	}
	return "";
}

static long data_row_count(const std::string& out) {
	long rows = 0;
	bool seen_header = false;
	for (const std::string& line : lines_of(out)) {
		if (line.empty() || line[0] == '#')
			continue;
		if (!seen_header) {
			seen_header = true;
			continue;
		}
		rows += 1;
	}
	return rows;
}

// every real is printed %.16e; pulling those tokens gives the numeric payload
static std::vector<std::string> real_tokens(const std::string& out) {
	static const std::regex pat(R"(-?\d\.\d{16}e[+-]\d+)");
	std::vector<std::string> tokens;
	for (auto it = std::sregex_iterator(out.begin(), out.end(), pat);
	     it != std::sregex_iterator(); ++it)
		tokens.push_back(it->str());
	return tokens;
}

static std::string drop_meta_line(const std::string& out, const std::string& key) {
	std::string kept;
	for (const std::string& line : lines_of(out)) {
		if (line.rfind("# " + key + "=", 0) == 0)
			continue;
		kept += line;
		kept += '\n';
	}
	return kept;
}

TEST_CASE("the reinforcement example emits a ten-row table with vanishing defect") {
	CliResult res = run_cli("pmf --dist qpolya --k 2 --n 3 --r 1,1,1 --m 1 --q 0.5");
	CHECK(res.code == 0);
	CHECK(data_row_count(res.out) == 10);
	CHECK(std::stod(meta_value(res.out, "defect")) <= 1e-12);
	CHECK(meta_value(res.out, "proper") == "true");

	// the exact run carries the same table as rationals
	CliResult exact = run_cli(
		"pmf --dist qpolya --k 2 --n 3 --r 1,1,1 --m 1 --q 1/2 --exact");
	CHECK(exact.code == 0);
	CHECK(std::stod(meta_value(exact.out, "defect")) == 0.0);
	CHECK(exact.out.find(",num,den") != std::string::npos);
}

TEST_CASE("output is byte-stable for a fixed configuration and seed") {
	const char* cmds[] = {
		"pmf --dist inverse-qpolya --n 2 --r 1,2 --m -1 --q 0.7 --wmax 6",
		"sample --dist qpolya --n 2 --r 2,1 --m 1 --q 0.5 --samples 5000 --seed 11",
		"identity-check",
	};
	for (const char* cmd : cmds) {
		CliResult a = run_cli(cmd);
		CliResult b = run_cli(cmd);
		CHECK(a.code == b.code);
		CHECK(a.out == b.out);
	}
}

TEST_CASE("csv and json encodings carry identical numeric payloads") {
	std::string base = "pmf --dist qpolya --k 2 --n 3 --r 1,1,1 --m 1 --q 0.5";
	CliResult csv = run_cli(base);
	CliResult json = run_cli(base + " --format json");
	CHECK(csv.code == 0);
	CHECK(json.code == 0);
	CHECK(real_tokens(csv.out) == real_tokens(json.out));
	CHECK_FALSE(real_tokens(csv.out).empty());

	// and the json side is a well-formed document with the same table
	nlohmann::json doc = nlohmann::json::parse(json.out);
	CHECK(doc["meta"]["version"] == "0.1.0");
	CHECK(doc["rows"].size() == 10);
	CHECK(doc["columns"].back() == "prob");
}

TEST_CASE("posterior matches the two-hypothesis hand enumeration") {
	CliResult res = run_cli("posterior --r 2 --n 1 --x 1 --q 1/2 --exact --format json");
	CHECK(res.code == 0);
	nlohmann::json doc = nlohmann::json::parse(res.out);
	REQUIRE(doc["rows"].size() == 2);
	CHECK(doc["rows"][0][0] == 1);
	CHECK(doc["rows"][0][2] == "4");
	CHECK(doc["rows"][0][3] == "7");
	CHECK(doc["rows"][1][0] == 2);
	CHECK(doc["rows"][1][2] == "3");
	CHECK(doc["rows"][1][3] == "7");
	CHECK(doc["meta"]["defect"] == 0.0);
}

TEST_CASE("the identity suite passes on the default grid in both backends") {
	for (const char* extra : {"", " --exact"}) {
		CliResult res = run_cli("identity-check" + std::string(extra));
		CHECK(res.code == 0);
		CHECK(meta_value(res.out, "pass") == "true");
		long rows = 0;
		bool seen_header = false;
		for (const std::string& line : lines_of(res.out)) {
			if (line.empty() || line[0] == '#')
				continue;
			if (!seen_header) {
				seen_header = true;
				continue;
			}
			CHECK(line.substr(line.size() - 5) == ",true");
			rows += 1;
		}
		CHECK(rows == 12);
	}
}

TEST_CASE("the doubling sweep reports a shrinking gap and honors the tolerance") {
	CliResult res = run_cli(
		"converge --dist qmult2 --r 1,1,1 --n 4 --m 1 --q 0.5 --tmax 4 "
		"--tolerance 1e-3");
	CHECK(res.code == 0);
	CHECK(meta_value(res.out, "pass") == "true");
	std::vector<double> sups;
	bool seen_header = false;
	for (const std::string& line : lines_of(res.out)) {
		if (line.empty() || line[0] == '#')
			continue;
		if (!seen_header) {
			seen_header = true;
			continue;
		}
		sups.push_back(std::stod(line.substr(line.rfind(',') + 1)));
	}
	REQUIRE(sups.size() == 5);
	for (size_t t = 1; t < sups.size(); ++t)
		CHECK(sups[t] < sups[t - 1]);

	// an unreachable tolerance turns the same run into a check failure
	CliResult breach = run_cli(
		"converge --dist qmult2 --r 1,1,1 --n 4 --m 1 --q 0.5 --tmax 2 "
		"--tolerance 1e-30");
	CHECK(breach.code == 1);
	CHECK(meta_value(breach.out, "pass") == "false");
}

TEST_CASE("worker threads change scheduling, never statistics") {
	std::string base =
		"sample --dist qpolya --n 3 --r 1,1,1 --m 1 --q 0.5 --samples 20000 "
		"--seed 42 --threads ";
	CliResult one = run_cli(base + "1");
	CliResult eight = run_cli(base + "8");
	CHECK(one.code == 0);
	CHECK(eight.code == 0);
	CHECK(drop_meta_line(one.out, "threads") == drop_meta_line(eight.out, "threads"));
}

TEST_CASE("stopped sampling reports escaped runs that match the defect") {
	CliResult res = run_cli(
		"sample --dist inverse-qpolya --n 2 --r 1,2 --m 1 --q 0.5 "
		"--samples 20000 --seed 7 --wmax 8 --draw-cap 300");
	CHECK(res.code == 0);
	double defect = std::stod(meta_value(res.out, "defect"));
	double escaped = std::stod(meta_value(res.out, "escaped"));
	CHECK(defect > 0.6);
	CHECK(std::fabs(escaped / 20000.0 - defect) < 0.02);
}

TEST_CASE("gated limit rates emit exact zeros past their support") {
	CliResult res = run_cli(
		"pmf --dist neg-qmult2 --n 2 --theta 1/16 --m -1 --nu 4 --q 1/2 "
		"--exact --wmax 6");
	CHECK(res.code == 0);
	CHECK(std::stod(meta_value(res.out, "defect")) == 0.0);
	bool seen_gate = false;
	bool seen_header = false;
	for (const std::string& line : lines_of(res.out)) {
		if (line.empty() || line[0] == '#')
			continue;
		if (!seen_header) {
			seen_header = true;
			continue;
		}
		if (line.rfind("5,", 0) == 0 || line.rfind("6,", 0) == 0) {
			CHECK(line.substr(line.size() - 4) == ",0,1");
			seen_gate = true;
		}
	}
	CHECK(seen_gate);
}

TEST_CASE("exit codes separate usage, check, and computation failures") {
	CHECK(run_cli("pmf --dist nosuch --n 2 --r 1,1 --m 1 --q 0.5").code == 2);
	CHECK(run_cli("pmf --dist qpolya --n 2 --r 1,1 --q 0.5").code == 0);
	CHECK(run_cli("pmf --n 2 --q 0.5").code == 2);
	CHECK(run_cli("pmf --dist qpolya --n 3 --r 1,1 --m -1 --q 0.5").code == 2);
	CHECK(run_cli("pmf --dist qhyper --n 2 --r 2,3 --m 1 --q 0.5").code == 2);
	CHECK(run_cli("pmf --dist qpolya --k 5 --n 2 --r 1,1 --m 1 --q 0.5").code == 2);
	CHECK(run_cli("pmf --dist qmult2 --n 2 --theta 0.4 --m 1 --q 2").code == 2);
	CHECK(run_cli("sample --dist qmult2 --n 2 --theta 0.4 --m 1 --q 0.5").code == 2);
	CHECK(run_cli("posterior --r 2,3 --n 1 --x 1 --q 0.5").code == 2);
	CHECK(run_cli("--help").code == 0);

	// a coarse-removal urn can strand mid-run; that is a computation error
	CHECK(run_cli("sample --dist qpolya --n 3 --r 3,5 --m -2 --q 0.5 "
		      "--samples 200 --seed 1")
		      .code == 3);
}
