"""Science-media corpus handling: document cleaning, the four-step balanced
sampling procedure, synthetic corpora for desk-scale runs, and JSONL IO.

Sampling steps (executed in order, duplicates never re-selected):
  1. per coverage setting (all-three / PR+SciTech / PR+General), sample N
     papers and 1 article per matching outlet category;
  2. extra random articles per outlet type;
  3. domain upsampling;
  4. popularity upsampling (coverage_count above a threshold).
Quota deficits on small pools produce warnings, not failures.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import DIMENSIONS, StatementCatalog, default_catalog

OUTLET_TYPES = ("General", "PressRelease", "SciTech")

FREQUENCY_LEVELS = ("never", "rarely", "monthly", "weekly", "daily")

POLITICAL_ITEMS = (
    "womens_reproductive_rights",
    "legalizing_drugs",
    "public_services_investment",
    "gender_identity_rights",
    "taxing_the_rich",
    "market_interference",
)

GENDERS = ("female", "male", "nonbinary")
AGE_BRACKETS = ("18-29", "30-44", "45-59", "60+")
EDUCATION_LEVELS = ("high_school", "college", "graduate")
COUNTRIES = ("US", "UK")


class EmptyContentError(ValueError):
    """Nothing remains of a document after cleaning."""


class InvalidConfigError(ValueError):
    """A sampling config requests something the pool cannot name."""


class InvalidParameterError(ValueError):
    """A generator parameter is out of range."""


class SchemaViolationError(ValueError):
    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


@dataclass
class RawArticle:
    doc_id: str
    title: str = ""
    body: str = ""
    outlet_name: str = ""
    author: str = ""
    publish_date: str = ""
    city: str = ""
    urls: list[str] = field(default_factory=list)
    outlet_type: str = ""
    science_domain: str = ""
    paper_id: str = ""
    coverage_count: int = 0
    extra: dict = field(default_factory=dict, compare=False)


@dataclass
class NewsDocument:
    doc_id: str
    title: str
    body: str
    outlet_type: str
    science_domain: str
    paper_id: str
    coverage_count: int
    extra: dict = field(default_factory=dict, compare=False)

    def text(self) -> str:
        """Title and body joined for model input."""
        return f"{self.title}\n{self.body}".strip()


@dataclass
class AnnotationRecord:
    annotator_id: str
    doc_id: str
    ratings: dict[str, int]
    country: str = "US"
    extra: dict = field(default_factory=dict, compare=False)


@dataclass
class ParticipantProfile:
    annotator_id: str
    gender: str
    age_bracket: str
    education_level: str
    science_news_frequency: str
    trust_in_science: int
    political_attitudes: dict[str, int]
    country: str
    extra: dict = field(default_factory=dict, compare=False)

    def frequency_scaled(self) -> float:
        """Science-news frequency mapped onto [0, 1] (never=0 .. daily=1)."""
        return FREQUENCY_LEVELS.index(self.science_news_frequency) / (len(FREQUENCY_LEVELS) - 1)


@dataclass
class SampleConfig:
    papers_per_coverage_setting: int = 80
    extra_per_outlet_type: int = 50
    domain_upsample: dict[str, int] = field(
        default_factory=lambda: {"Social Science": 50, "Humanities": 50, "Engineering": 100}
    )
    popularity_threshold: int = 30
    popularity_upsample: int = 30
    seed: int = 0

    def __post_init__(self):
        counts = [self.papers_per_coverage_setting, self.extra_per_outlet_type,
                  self.popularity_upsample, *self.domain_upsample.values()]
        if any(c < 0 for c in counts):
            raise InvalidConfigError("sample counts must be >= 0")
        if self.popularity_threshold < 1:
            raise InvalidConfigError("popularity_threshold must be >= 1")


@dataclass
class SampleResult:
    documents: list[NewsDocument]
    step_counts: list[int]
    warnings: list[str]

    def __iter__(self):
        return iter(self.documents)

    def __len__(self):
        return len(self.documents)


# ---------------------------------------------------------------------------
# Cleaning
# ---------------------------------------------------------------------------

_URL_PATTERN = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)


def _strip_urls(text: str) -> str:
    text = _URL_PATTERN.sub(" ", text)
    return re.sub(r"\s+", " ", text).strip()


def clean_document(raw: RawArticle) -> NewsDocument:
    """Strip URL substrings from title/body and drop outlet/author/date/city
    metadata; sampling metadata is retained. Idempotent."""
    title = _strip_urls(raw.title or "")
    body = _strip_urls(raw.body or "")
    if not title and not body:
        raise EmptyContentError(f"document {raw.doc_id}: no content remains after cleaning")
    return NewsDocument(
        doc_id=raw.doc_id,
        title=title,
        body=body,
        outlet_type=raw.outlet_type,
        science_domain=raw.science_domain,
        paper_id=raw.paper_id,
        coverage_count=raw.coverage_count,
    )


# ---------------------------------------------------------------------------
# Balanced sampling
# ---------------------------------------------------------------------------

COVERAGE_SETTINGS: tuple[tuple[str, frozenset[str]], ...] = (
    ("all_three", frozenset(OUTLET_TYPES)),
    ("pr_scitech", frozenset({"PressRelease", "SciTech"})),
    ("pr_general", frozenset({"PressRelease", "General"})),
)


def _take(rng: np.random.Generator, items: list, k: int):
    """Sample k items without replacement (all of them if fewer remain)."""
    if k >= len(items):
        return list(items)
    idx = rng.choice(len(items), size=k, replace=False)
    return [items[i] for i in sorted(idx)]


def sample_batch(pool: list[NewsDocument], config: SampleConfig) -> SampleResult:
    """Four-step balanced sample; deterministic given (pool order, seed)."""
    rng = np.random.default_rng(config.seed)
    warnings: list[str] = []
    selected: list[NewsDocument] = []
    selected_ids: set[str] = set()
    step_counts: list[int] = []

    def add(doc: NewsDocument):
        selected.append(doc)
        selected_ids.add(doc.doc_id)

    by_paper: dict[str, dict[str, list[NewsDocument]]] = {}
    for doc in pool:
        by_paper.setdefault(doc.paper_id, {}).setdefault(doc.outlet_type, []).append(doc)

    # Step 1: coverage settings. A paper belongs to a setting when the set of
    # outlet types covering it is exactly the setting's set.
    count_before = 0
    paper_order = list(by_paper)
    for setting_name, type_set in COVERAGE_SETTINGS:
        eligible = [p for p in paper_order if frozenset(by_paper[p]) == type_set]
        chosen = _take(rng, eligible, config.papers_per_coverage_setting)
        if len(chosen) < config.papers_per_coverage_setting:
            warnings.append(
                f"step1/{setting_name}: wanted {config.papers_per_coverage_setting} papers, "
                f"pool has {len(eligible)}"
            )
        for paper in chosen:
            for outlet_type in OUTLET_TYPES:
                if outlet_type not in type_set:
                    continue
                candidates = [d for d in by_paper[paper][outlet_type] if d.doc_id not in selected_ids]
                if not candidates:
                    warnings.append(f"step1/{setting_name}: no unselected {outlet_type} "
                                    f"article for paper {paper}")
                    continue
                add(candidates[int(rng.integers(len(candidates)))])
    step_counts.append(len(selected) - count_before)

    # Step 2: extra random articles per outlet type.
    count_before = len(selected)
    for outlet_type in OUTLET_TYPES:
        candidates = [d for d in pool if d.outlet_type == outlet_type and d.doc_id not in selected_ids]
        chosen = _take(rng, candidates, config.extra_per_outlet_type)
        if len(chosen) < config.extra_per_outlet_type:
            warnings.append(f"step2/{outlet_type}: wanted {config.extra_per_outlet_type}, "
                            f"only {len(chosen)} available")
        for doc in chosen:
            add(doc)
    step_counts.append(len(selected) - count_before)

    # Step 3: domain upsampling.
    count_before = len(selected)
    pool_domains = {d.science_domain for d in pool}
    for domain, quota in config.domain_upsample.items():
        if domain not in pool_domains:
            raise InvalidConfigError(f"domain {domain!r} requested for upsampling is absent from the pool")
        candidates = [d for d in pool if d.science_domain == domain and d.doc_id not in selected_ids]
        chosen = _take(rng, candidates, quota)
        if len(chosen) < quota:
            warnings.append(f"step3/{domain}: wanted {quota}, only {len(chosen)} available")
        for doc in chosen:
            add(doc)
    step_counts.append(len(selected) - count_before)

    # Step 4: popularity upsampling.
    count_before = len(selected)
    candidates = [
        d for d in pool
        if d.coverage_count > config.popularity_threshold and d.doc_id not in selected_ids
    ]
    chosen = _take(rng, candidates, config.popularity_upsample)
    if len(chosen) < config.popularity_upsample:
        warnings.append(f"step4/popularity: wanted {config.popularity_upsample}, "
                        f"only {len(chosen)} available")
    for doc in chosen:
        add(doc)
    step_counts.append(len(selected) - count_before)

    return SampleResult(documents=selected, step_counts=step_counts, warnings=warnings)


# ---------------------------------------------------------------------------
# Synthetic annotation generator
# ---------------------------------------------------------------------------

@dataclass
class GeneratorParams:
    """Controls the synthetic rating process.

    Ratings derive from per-document latent dimension means plus an annotator
    leniency bias and Gaussian noise, rounded and clamped to 1..5. Optional
    background effects shift ratings linearly with annotator covariates
    (frequency scaled to [0,1]; trust centered at 3), which lets studies
    recover planted coefficients.
    """

    latent_means: dict[str, np.ndarray] | None = None
    latent_range: tuple[float, float] = (1.5, 4.5)
    noise_scale: float = 0.6
    bias_scale: float = 0.3
    frequency_effect: float = 0.0
    trust_effect: float = 0.0
    missing_rate: float = 0.0

    def __post_init__(self):
        if self.noise_scale < 0:
            raise InvalidParameterError(f"noise_scale must be >= 0, got {self.noise_scale}")
        if self.bias_scale < 0:
            raise InvalidParameterError(f"bias_scale must be >= 0, got {self.bias_scale}")
        if not 0 <= self.missing_rate < 1:
            raise InvalidParameterError(f"missing_rate must be in [0, 1), got {self.missing_rate}")


def _make_participants(rng: np.random.Generator, n: int) -> list[ParticipantProfile]:
    profiles = []
    for i in range(n):
        country = COUNTRIES[i % 2]
        profiles.append(
            ParticipantProfile(
                annotator_id=f"ann{i:04d}",
                gender=GENDERS[int(rng.choice(len(GENDERS), p=[0.49, 0.49, 0.02]))],
                age_bracket=AGE_BRACKETS[int(rng.integers(len(AGE_BRACKETS)))],
                education_level=EDUCATION_LEVELS[int(rng.integers(len(EDUCATION_LEVELS)))],
                science_news_frequency=FREQUENCY_LEVELS[int(rng.integers(len(FREQUENCY_LEVELS)))],
                trust_in_science=int(rng.integers(1, 6)),
                political_attitudes={item: int(rng.integers(1, 6)) for item in POLITICAL_ITEMS},
                country=country,
            )
        )
    return profiles


def simulate_annotations(
    docs: list[NewsDocument],
    participants: int,
    labels_per_doc: int,
    generator_params: GeneratorParams | None = None,
    seed: int = 0,
    catalog: StatementCatalog | None = None,
) -> tuple[list[AnnotationRecord], list[ParticipantProfile]]:
    """Generate annotation records: labels_per_doc records per country group
    per document. Deterministic for a fixed seed."""
    params = generator_params or GeneratorParams()
    catalog = catalog or default_catalog()
    if labels_per_doc < 1:
        raise InvalidParameterError("labels_per_doc must be >= 1")

    rng = np.random.default_rng(seed)
    profiles = _make_participants(rng, participants)
    by_country = {c: [p for p in profiles if p.country == c] for c in COUNTRIES}
    for country, group in by_country.items():
        if len(group) < labels_per_doc:
            raise InvalidParameterError(
                f"{country} group has {len(group)} participants < labels_per_doc={labels_per_doc}"
            )

    dim_index = {d: k for k, d in enumerate(DIMENSIONS)}
    latents: dict[str, np.ndarray] = {}
    for doc in docs:
        if params.latent_means is not None and doc.doc_id in params.latent_means:
            latents[doc.doc_id] = np.asarray(params.latent_means[doc.doc_id], dtype=float)
        else:
            lo, hi = params.latent_range
            latents[doc.doc_id] = rng.uniform(lo, hi, size=len(DIMENSIONS))

    biases = {p.annotator_id: (rng.normal(0.0, params.bias_scale) if params.bias_scale > 0 else 0.0)
              for p in profiles}

    records: list[AnnotationRecord] = []
    for doc_pos, doc in enumerate(docs):
        mu = latents[doc.doc_id]
        for country in COUNTRIES:
            group = by_country[country]
            chosen = rng.choice(len(group), size=labels_per_doc, replace=False)
            for j in sorted(int(k) for k in chosen):
                annotator = group[j]
                shift = (
                    params.frequency_effect * annotator.frequency_scaled()
                    + params.trust_effect * (annotator.trust_in_science - 3)
                )
                ratings: dict[str, int] = {}
                for statement in catalog.statements:
                    core = mu[dim_index[statement.dimension]] + shift
                    expressed = (6.0 - core) if statement.reverse_coded else core
                    expressed += biases[annotator.annotator_id]
                    if params.noise_scale > 0:
                        expressed += rng.normal(0.0, params.noise_scale)
                    if params.missing_rate > 0 and rng.random() < params.missing_rate:
                        continue
                    ratings[statement.id] = int(np.clip(np.rint(expressed), 1, 5))
                records.append(
                    AnnotationRecord(
                        annotator_id=annotator.annotator_id,
                        doc_id=doc.doc_id,
                        ratings=ratings,
                        country=country,
                    )
                )
    return records, profiles


# ---------------------------------------------------------------------------
# Synthetic article pool (desk-scale stand-in for the raw corpus)
# ---------------------------------------------------------------------------

_DOMAIN_WEIGHTS = {
    "Medicine": 0.25,
    "Engineering": 0.25,
    "Social Science": 0.20,
    "Humanities": 0.15,
    "Physics": 0.15,
}

_FILLER = (
    "researchers report new evidence about the finding and discuss what it "
    "means for the field the team measured outcomes across several settings "
    "and compared them with earlier results"
).split()

# Marker tokens inject dimension signal into the text so the light scorer
# has something learnable.
_DIM_MARKERS = [f"signal{k}" for k in range(len(DIMENSIONS))]


def marker_tokens(latent: np.ndarray) -> list[str]:
    """Dimension-marker tokens repeated in proportion to the latent level."""
    words: list[str] = []
    for k, level in enumerate(latent):
        words.extend([_DIM_MARKERS[k]] * int(round((float(level) - 1.0) * 2)))
    return words


def _article_text(rng: np.random.Generator, latent: np.ndarray, with_url: bool) -> tuple[str, str]:
    title_words = ["study"] + list(rng.choice(_FILLER, size=5))
    body_words = marker_tokens(latent)
    body_words.extend(rng.choice(_FILLER, size=30))
    order = rng.permutation(len(body_words))
    body = " ".join(body_words[i] for i in order)
    if with_url:
        body += " https://example.org/source"
    return " ".join(title_words), body


def synthetic_pool(
    seed: int = 0,
    papers_all_three: int = 120,
    papers_pr_scitech: int = 120,
    papers_pr_general: int = 120,
    papers_other: int = 90,
    popular_fraction: float = 0.12,
) -> tuple[list[RawArticle], dict[str, np.ndarray]]:
    """Deterministic synthetic raw-article pool with per-document latent
    perception means (returned separately, keyed by doc_id)."""
    rng = np.random.default_rng(seed)
    domains = list(_DOMAIN_WEIGHTS)
    weights = np.array(list(_DOMAIN_WEIGHTS.values()))

    paper_specs: list[frozenset[str]] = []
    paper_specs += [frozenset(OUTLET_TYPES)] * papers_all_three
    paper_specs += [frozenset({"PressRelease", "SciTech"})] * papers_pr_scitech
    paper_specs += [frozenset({"PressRelease", "General"})] * papers_pr_general
    other_choices = [frozenset({"General"}), frozenset({"SciTech"}), frozenset({"General", "SciTech"})]
    paper_specs += [other_choices[int(rng.integers(3))] for _ in range(papers_other)]

    articles: list[RawArticle] = []
    latents: dict[str, np.ndarray] = {}
    doc_counter = 0
    for paper_idx, type_set in enumerate(paper_specs):
        paper_id = f"paper{paper_idx:05d}"
        domain = domains[int(rng.choice(len(domains), p=weights))]
        paper_latent = rng.uniform(1.5, 4.5, size=len(DIMENSIONS))
        popular = rng.random() < popular_fraction
        n_articles = {t: int(rng.integers(1, 3)) for t in sorted(type_set)}
        total = sum(n_articles.values())
        coverage = int(rng.integers(31, 81)) if popular else total
        for outlet_type in sorted(type_set):
            for _ in range(n_articles[outlet_type]):
                doc_id = f"doc{doc_counter:06d}"
                doc_counter += 1
                latent = np.clip(paper_latent + rng.normal(0.0, 0.15, size=len(DIMENSIONS)), 1.0, 5.0)
                title, body = _article_text(rng, latent, with_url=rng.random() < 0.3)
                articles.append(
                    RawArticle(
                        doc_id=doc_id,
                        title=title,
                        body=body,
                        outlet_name=f"{outlet_type} Outlet {int(rng.integers(40))}",
                        author="Staff Writer",
                        publish_date="2021-01-01",
                        city="Springfield",
                        urls=[],
                        outlet_type=outlet_type,
                        science_domain=domain,
                        paper_id=paper_id,
                        coverage_count=max(coverage, 1),
                    )
                )
                latents[doc_id] = latent
    return articles, latents


# ---------------------------------------------------------------------------
# JSONL IO
# ---------------------------------------------------------------------------

def _doc_to_dict(d: NewsDocument) -> dict:
    out = dict(d.extra)
    out.update(
        doc_id=d.doc_id, title=d.title, body=d.body, outlet_type=d.outlet_type,
        science_domain=d.science_domain, paper_id=d.paper_id, coverage_count=d.coverage_count,
    )
    return out


def _doc_from_dict(data: dict) -> NewsDocument:
    data = dict(data)
    known = {k: data.pop(k) for k in
             ("doc_id", "title", "body", "outlet_type", "science_domain", "paper_id", "coverage_count")
             if k in data}
    if "doc_id" not in known:
        raise ValueError("missing doc_id")
    cov = int(known.get("coverage_count", 0))
    if cov < 0:
        raise ValueError(f"coverage_count must be >= 0, got {cov}")
    return NewsDocument(
        doc_id=str(known["doc_id"]),
        title=str(known.get("title", "")),
        body=str(known.get("body", "")),
        outlet_type=str(known.get("outlet_type", "")),
        science_domain=str(known.get("science_domain", "")),
        paper_id=str(known.get("paper_id", "")),
        coverage_count=cov,
        extra=data,
    )


def _annotation_to_dict(r: AnnotationRecord) -> dict:
    out = dict(r.extra)
    out.update(annotator_id=r.annotator_id, doc_id=r.doc_id, ratings=r.ratings, country=r.country)
    return out


def _annotation_from_dict(data: dict) -> AnnotationRecord:
    data = dict(data)
    ratings_raw = data.pop("ratings", {})
    ratings: dict[str, int] = {}
    for sid, value in ratings_raw.items():
        if not isinstance(value, int) or isinstance(value, bool) or not 1 <= value <= 5:
            raise ValueError(f"rating {value!r} for statement {sid!r} not an integer in 1..5")
        ratings[sid] = value
    country = data.pop("country", "US")
    if country not in COUNTRIES:
        raise ValueError(f"country must be one of {COUNTRIES}, got {country!r}")
    return AnnotationRecord(
        annotator_id=str(data.pop("annotator_id")),
        doc_id=str(data.pop("doc_id")),
        ratings=ratings,
        country=country,
        extra=data,
    )


def _participant_to_dict(p: ParticipantProfile) -> dict:
    out = dict(p.extra)
    out.update(
        annotator_id=p.annotator_id, gender=p.gender, age_bracket=p.age_bracket,
        education_level=p.education_level, science_news_frequency=p.science_news_frequency,
        trust_in_science=p.trust_in_science, political_attitudes=p.political_attitudes,
        country=p.country,
    )
    return out


def _participant_from_dict(data: dict) -> ParticipantProfile:
    data = dict(data)
    freq = data.pop("science_news_frequency")
    if freq not in FREQUENCY_LEVELS:
        raise ValueError(f"science_news_frequency must be one of {FREQUENCY_LEVELS}, got {freq!r}")
    trust = data.pop("trust_in_science")
    if not isinstance(trust, int) or not 1 <= trust <= 5:
        raise ValueError(f"trust_in_science must be an integer in 1..5, got {trust!r}")
    attitudes = {k: int(v) for k, v in data.pop("political_attitudes", {}).items()}
    for item, v in attitudes.items():
        if not 1 <= v <= 5:
            raise ValueError(f"political attitude {item!r} must be in 1..5, got {v}")
    return ParticipantProfile(
        annotator_id=str(data.pop("annotator_id")),
        gender=str(data.pop("gender", "")),
        age_bracket=str(data.pop("age_bracket", "")),
        education_level=str(data.pop("education_level", "")),
        science_news_frequency=freq,
        trust_in_science=trust,
        political_attitudes=attitudes,
        country=str(data.pop("country", "US")),
        extra=data,
    )


def _raw_to_dict(a: RawArticle) -> dict:
    out = dict(a.extra)
    out.update(
        doc_id=a.doc_id, title=a.title, body=a.body, outlet_name=a.outlet_name,
        author=a.author, publish_date=a.publish_date, city=a.city, urls=a.urls,
        outlet_type=a.outlet_type, science_domain=a.science_domain,
        paper_id=a.paper_id, coverage_count=a.coverage_count,
    )
    return out


def _raw_from_dict(data: dict) -> RawArticle:
    data = dict(data)
    if "doc_id" not in data:
        raise ValueError("missing doc_id")
    fields = ("doc_id", "title", "body", "outlet_name", "author", "publish_date",
              "city", "urls", "outlet_type", "science_domain", "paper_id", "coverage_count")
    known = {k: data.pop(k) for k in fields if k in data}
    return RawArticle(
        doc_id=str(known["doc_id"]),
        title=str(known.get("title", "")),
        body=str(known.get("body", "")),
        outlet_name=str(known.get("outlet_name", "")),
        author=str(known.get("author", "")),
        publish_date=str(known.get("publish_date", "")),
        city=str(known.get("city", "")),
        urls=list(known.get("urls", [])),
        outlet_type=str(known.get("outlet_type", "")),
        science_domain=str(known.get("science_domain", "")),
        paper_id=str(known.get("paper_id", "")),
        coverage_count=int(known.get("coverage_count", 0)),
        extra=data,
    )


# kind -> (serializer, deserializer); analysis registers its own types here.
JSONL_CODECS: dict[str, tuple] = {
    "document": (_doc_to_dict, _doc_from_dict),
    "annotation": (_annotation_to_dict, _annotation_from_dict),
    "participant": (_participant_to_dict, _participant_from_dict),
    "raw_article": (_raw_to_dict, _raw_from_dict),
}

_TYPE_TO_KIND = {
    NewsDocument: "document",
    AnnotationRecord: "annotation",
    ParticipantProfile: "participant",
    RawArticle: "raw_article",
}


def kind_of(record) -> str:
    for cls, kind in _TYPE_TO_KIND.items():
        if isinstance(record, cls):
            return kind
    raise TypeError(f"no JSONL codec for {type(record).__name__}")


def register_jsonl_kind(kind: str, cls, to_dict, from_dict) -> None:
    JSONL_CODECS[kind] = (to_dict, from_dict)
    _TYPE_TO_KIND[cls] = kind


def save_jsonl(path, records) -> None:
    """One JSON object per line; record type inferred from the first record."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            to_dict, _ = JSONL_CODECS[kind_of(record)]
            fh.write(json.dumps(to_dict(record), sort_keys=True, ensure_ascii=False))
            fh.write("\n")


def load_jsonl(path, kind: str) -> list:
    """Load records of a given kind; schema violations name the line."""
    if kind not in JSONL_CODECS:
        raise ValueError(f"unknown JSONL kind {kind!r}; known: {sorted(JSONL_CODECS)}")
    _, from_dict = JSONL_CODECS[kind]
    path = Path(path)
    records = []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
                records.append(from_dict(data))
            except (ValueError, KeyError, TypeError) as exc:
                raise SchemaViolationError(path, line_no, str(exc)) from exc
    return records
