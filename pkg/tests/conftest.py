import pytest

from deeplinker.corpus import list_corpus_models, load_corpus_model


@pytest.fixture(scope="session")
def corpus_names():
    return list_corpus_models()


@pytest.fixture
def motivating():
    return load_corpus_model("motivating")


@pytest.fixture
def anki():
    return load_corpus_model("anki")


@pytest.fixture
def wallstreet():
    return load_corpus_model("wallstreet")


@pytest.fixture
def listing1():
    return load_corpus_model("listing1")


@pytest.fixture
def popup():
    return load_corpus_model("popup")


@pytest.fixture
def missing_id():
    return load_corpus_model("missing_id")


@pytest.fixture
def opaque():
    return load_corpus_model("opaque")


@pytest.fixture
def minimal():
    return load_corpus_model("minimal")
