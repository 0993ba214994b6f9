import threading

import pytest
import torch
import uvicorn
from transformers import BertConfig, BertForSequenceClassification, BertTokenizerFast

from victim_server.app import ClassifierBackend, ServerConfig, create_app

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "a", "good", "bad", "film", "the", "solid", "awful", "great", "boring",
]


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory):
    """Tiny randomly initialized BERT classifier saved to disk.

    Random weights are fine: the contract tests only need a loadable
    transformer that answers deterministically.
    """
    path = tmp_path_factory.mktemp("tiny-model")
    vocab_file = path / "vocab.txt"
    vocab_file.write_text("\n".join(VOCAB) + "\n")
    tokenizer = BertTokenizerFast(vocab_file=str(vocab_file))
    torch.manual_seed(1234)
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=32,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
        num_labels=2,
    )
    model = BertForSequenceClassification(config)
    model.save_pretrained(path)
    tokenizer.save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def server_config(model_dir):
    return ServerConfig(model=model_dir, max_batch=8, deterministic=True)


@pytest.fixture(scope="session")
def backend(server_config):
    return ClassifierBackend(server_config)


@pytest.fixture(scope="session")
def app(server_config, backend):
    return create_app(server_config, backend=backend)


@pytest.fixture(scope="session")
def live_server(app):
    """The app served over real HTTP for remote-client conformance tests."""
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        pass
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)
