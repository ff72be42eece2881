import pytest

from deident.synthetic import make_corpus, write_corpus


@pytest.fixture(scope="session")
def corpus():
    return make_corpus(200)


@pytest.fixture(scope="session")
def corpus_dir(corpus, tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus") / "in"
    write_corpus(corpus, root)
    return root


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    lines = test_acceptance.summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
