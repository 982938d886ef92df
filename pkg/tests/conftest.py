from _pytest.config.argparsing import Parser


def pytest_addoption(parser: Parser):
    parser.addoption(
        "--hardy-cert-bin",
        help="Installed hardy-cert command to test, rather than running src/hardycert.py",
    )
