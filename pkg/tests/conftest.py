from __future__ import annotations

import shutil

import pytest

from auditflow import clock
from auditflow.fixtures import build_screening_repo, build_smile_repo
from auditflow.repository import AuditRepository


@pytest.fixture(autouse=True)
def _no_clock_override(monkeypatch):
    monkeypatch.delenv(clock.ENV_NOW, raising=False)


@pytest.fixture(scope="session")
def smile_repo_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("fixture") / "smile"
    build_smile_repo(path)
    return path


@pytest.fixture(scope="session")
def screening_repo_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("fixture") / "screening"
    build_screening_repo(path)
    return path


@pytest.fixture
def smile_copy(smile_repo_dir, tmp_path):
    dst = tmp_path / "smile"
    shutil.copytree(smile_repo_dir, dst)
    return dst


@pytest.fixture
def screening_copy(screening_repo_dir, tmp_path):
    dst = tmp_path / "screening"
    shutil.copytree(screening_repo_dir, dst)
    return dst


@pytest.fixture
def smile_repo(smile_copy) -> AuditRepository:
    return AuditRepository.load(smile_copy)


@pytest.fixture
def screening_repo(screening_copy) -> AuditRepository:
    return AuditRepository.load(screening_copy)
