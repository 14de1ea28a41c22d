"""The two observational studies and the engagement predictor.

Study 1 (perception as outcome): per-annotator dimension ratings regressed on
annotator background factors with the document as random intercept and the
science domain / outlet type as fixed effects.

Study 2 (perception as predictor): log-transformed Reddit engagement
regressed on estimated perception scores with the URL as random intercept and
subreddit, URL domain, and first-share as fixed effects; perception
predictors are VIF-pruned first. Sharing the URL across differently framed
posts is what makes the within-URL contrast a natural experiment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from urllib.parse import parse_qsl, urlsplit

import numpy as np

from .aggregate import PerceptionProfile
from .catalog import DIMENSIONS, Dimension, StatementCatalog
from .corpus import (
    AnnotationRecord,
    NewsDocument,
    POLITICAL_ITEMS,
    ParticipantProfile,
    register_jsonl_kind,
)
from .stats import (
    MixedModelResult,
    build_design,
    fit_random_intercept_lmm,
    stepwise_vif_prune,
)

OUTCOME_NAMES = ("log_score", "log_comments")

_TRACKING_PARAMS = {"utm_source", "utm_medium", "utm_campaign", "utm_term", "utm_content", "fbclid", "gclid"}


class MissingProfileError(ValueError):
    def __init__(self, annotator_ids: list[str]):
        super().__init__(f"no participant profile for annotators: {annotator_ids}")
        self.annotator_ids = annotator_ids


class MissingDimensionError(ValueError):
    pass


@dataclass
class SocialPost:
    post_id: str
    url: str
    subreddit: str
    created_at: float
    score: int
    num_comments: int
    title_text: str
    first_share_of_url_in_subreddit: bool = False
    extra: dict = field(default_factory=dict, compare=False)


def normalize_url(url: str) -> str:
    """Lowercased host, no scheme, no trailing slash, common tracking query
    parameters stripped."""
    url = url.strip()
    if "://" not in url:
        url = "http://" + url
    parts = urlsplit(url)
    host = (parts.hostname or "").lower()
    path = parts.path.rstrip("/")
    query_pairs = [(k, v) for k, v in parse_qsl(parts.query, keep_blank_values=True)
                   if k.lower() not in _TRACKING_PARAMS]
    query = "&".join(f"{k}={v}" for k, v in query_pairs)
    out = host + path
    if query:
        out += "?" + query
    return out


def url_domain(normalized_url: str) -> str:
    return normalized_url.split("/", 1)[0].split("?", 1)[0]


def engagement_outcomes(post: SocialPost) -> tuple[float, float]:
    """(log_score, log_comments): log1p transforms, scores floored at 0."""
    log_score = math.log1p(max(post.score, 0))
    log_comments = math.log1p(post.num_comments)
    return log_score, log_comments


@dataclass
class EngagementRow:
    post_id: str
    url: str
    subreddit: str
    domain: str
    first_share: bool
    log_score: float
    log_comments: float
    profile: PerceptionProfile | None = None


@dataclass
class EngagementDataset:
    rows: list[EngagementRow]
    metadata: dict = field(default_factory=lambda: {
        "score_transform": "log1p(max(score, 0))",
        "comments_transform": "log1p(num_comments)",
    })

    def __len__(self):
        return len(self.rows)

    def urls(self) -> list[str]:
        return sorted({r.url for r in self.rows})


def build_url_groups(posts: list[SocialPost]) -> EngagementDataset:
    """Dedup posts, drop single-share URLs, flag first shares.

    Posts are canonically ordered by post_id, duplicate post_ids dropped,
    URLs normalized, URLs with < 2 remaining posts excluded. first_share is
    per (url, subreddit) by created_at, ties broken by post_id."""
    seen: set[str] = set()
    unique: list[SocialPost] = []
    for post in sorted(posts, key=lambda p: p.post_id):
        if post.post_id in seen:
            continue
        seen.add(post.post_id)
        unique.append(post)

    norm = {p.post_id: normalize_url(p.url) for p in unique}
    counts: dict[str, int] = {}
    for p in unique:
        counts[norm[p.post_id]] = counts.get(norm[p.post_id], 0) + 1
    kept = [p for p in unique if counts[norm[p.post_id]] >= 2]

    first: dict[tuple[str, str], str] = {}
    for p in sorted(kept, key=lambda p: (p.created_at, p.post_id)):
        key = (norm[p.post_id], p.subreddit)
        first.setdefault(key, p.post_id)

    rows = []
    for p in kept:
        u = norm[p.post_id]
        log_score, log_comments = engagement_outcomes(p)
        rows.append(
            EngagementRow(
                post_id=p.post_id,
                url=u,
                subreddit=p.subreddit,
                domain=url_domain(u),
                first_share=first[(u, p.subreddit)] == p.post_id,
                log_score=log_score,
                log_comments=log_comments,
            )
        )
    return EngagementDataset(rows=rows)


def attach_profiles(dataset: EngagementDataset, profiles: dict[str, PerceptionProfile]) -> EngagementDataset:
    """Attach perception profiles (keyed by post_id); rows without one drop."""
    rows = []
    for row in dataset.rows:
        profile = profiles.get(row.post_id)
        if profile is None:
            continue
        rows.append(EngagementRow(**{**row.__dict__, "profile": profile}))
    return EngagementDataset(rows=rows, metadata=dict(dataset.metadata))


def score_posts(posts: list[SocialPost], model, catalog: StatementCatalog, backend) -> dict[str, PerceptionProfile]:
    """Estimated perception profiles for post title texts."""
    from . import perceiver

    out: dict[str, PerceptionProfile] = {}
    for post in posts:
        doc = NewsDocument(doc_id=post.post_id, title=post.title_text, body="",
                           outlet_type="", science_domain="", paper_id="", coverage_count=0)
        _, profile = perceiver.predict(model, doc, catalog, backend)
        out[post.post_id] = profile
    return out


# ---------------------------------------------------------------------------
# Study 1: background factors -> perception ratings
# ---------------------------------------------------------------------------

def perception_outcome_study(
    records: list[AnnotationRecord],
    participants: list[ParticipantProfile],
    docs: list[NewsDocument],
    dimension: Dimension,
    catalog: StatementCatalog | None = None,
) -> MixedModelResult:
    """Mixed-effect regression of one dimension's per-annotator rating on
    demographic, science-experience, and political-attitude factors, with the
    science domain and outlet type as fixed effects and the document as
    random intercept. Frequency enters scaled to [0,1], trust as its raw
    1..5 value; true categoricals are reference-coded."""
    from .aggregate import annotator_profile
    from .catalog import default_catalog

    catalog = catalog or default_catalog()
    profile_map = {p.annotator_id: p for p in participants}
    doc_map = {d.doc_id: d for d in docs}
    missing = sorted({r.annotator_id for r in records if r.annotator_id not in profile_map})
    if missing:
        raise MissingProfileError(missing)

    y = []
    freq, trust = [], []
    political: dict[str, list[float]] = {item: [] for item in POLITICAL_ITEMS}
    gender, age, education, domain, outlet = [], [], [], [], []
    groups = []
    for rec in records:
        if not rec.ratings or rec.doc_id not in doc_map:
            continue
        prof = annotator_profile(rec, catalog, reverse_code=True)
        if dimension not in prof.scores:
            continue
        participant = profile_map[rec.annotator_id]
        doc = doc_map[rec.doc_id]
        y.append(prof.scores[dimension])
        freq.append(participant.frequency_scaled())
        trust.append(float(participant.trust_in_science))
        for item in POLITICAL_ITEMS:
            political[item].append(float(participant.political_attitudes.get(item, 3)))
        gender.append(participant.gender)
        age.append(participant.age_bracket)
        education.append(participant.education_level)
        domain.append(doc.science_domain)
        outlet.append(doc.outlet_type)
        groups.append(rec.doc_id)

    if not y:
        raise ValueError("no usable rows after joining records, participants, and documents")

    numeric = {"science_news_frequency": np.array(freq), "trust_in_science": np.array(trust)}
    for item in POLITICAL_ITEMS:
        numeric[item] = np.array(political[item])
    dm = build_design(
        numeric,
        categoricals={
            "gender": gender,
            "age_bracket": age,
            "education_level": education,
            "science_domain": domain,
            "outlet_type": outlet,
        },
    )
    return fit_random_intercept_lmm(dm, np.array(y), groups, group_name="doc_id")


# ---------------------------------------------------------------------------
# Study 2: perceptions -> engagement
# ---------------------------------------------------------------------------

@dataclass
class EngagementStudyResult:
    results: dict[str, MixedModelResult]
    retained_dimensions: list[Dimension]
    removal_log: list[tuple[str, float]]
    dimension_means: dict[Dimension, float]

    def manifest(self) -> dict:
        return {
            "retained_dimensions": [d.value for d in self.retained_dimensions],
            "removal_log": [{"column": c, "vif": v} for c, v in self.removal_log],
            "outcomes": {
                name: {
                    "coefficients": res.coefficients,
                    "std_errors": res.std_errors,
                    "p_values": res.p_values,
                    "random_intercept_variance": res.random_intercept_variance,
                    "residual_variance": res.residual_variance,
                    "converged": res.converged,
                }
                for name, res in self.results.items()
            },
        }


def engagement_study(dataset: EngagementDataset, prune_threshold: float = 5.0) -> EngagementStudyResult:
    """VIF-prune the 12 perception predictors, then fit each outcome with the
    URL as random intercept and subreddit / URL domain / first-share as fixed
    effects."""
    rows = [r for r in dataset.rows if r.profile is not None]
    if not rows:
        raise ValueError("dataset has no rows with perception profiles")
    urls = {r.url for r in rows}
    if len(urls) < 2:
        raise ValueError("need at least 2 URL groups for a random intercept")

    percept_cols = {}
    for dim in DIMENSIONS:
        values = [r.profile.scores.get(dim) for r in rows]
        if any(v is None for v in values):
            continue
        percept_cols[dim.value] = np.array(values, dtype=float)

    prune_dm = build_design(percept_cols)
    retained_names, removal_log = stepwise_vif_prune(prune_dm, threshold=prune_threshold)
    retained = [Dimension(n) for n in retained_names]

    numeric = {name: percept_cols[name] for name in retained_names}
    numeric["first_share"] = np.array([1.0 if r.first_share else 0.0 for r in rows])
    categoricals = {
        "subreddit": [r.subreddit for r in rows],
        "domain": [r.domain for r in rows],
    }
    dm = build_design(numeric, categoricals=categoricals)
    n_predictors = dm.p - 1
    if len(rows) < 10 * n_predictors:
        raise ValueError(
            f"{len(rows)} rows < 10x {n_predictors} predictors; dataset too small for the study"
        )

    groups = [r.url for r in rows]
    results = {}
    for outcome in OUTCOME_NAMES:
        y = np.array([getattr(r, outcome) for r in rows])
        results[outcome] = fit_random_intercept_lmm(dm, y, groups, group_name="url")

    dim_means = {d: float(np.mean(percept_cols[d.value])) for d in retained}
    return EngagementStudyResult(
        results=results,
        retained_dimensions=retained,
        removal_log=removal_log,
        dimension_means=dim_means,
    )


@dataclass
class EngagementPredictor:
    outcome: str
    intercept: float
    coefficients: dict[Dimension, float]
    residual_scale: float
    provenance: str = ""

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "intercept": self.intercept,
            "coefficients": {d.value: c for d, c in self.coefficients.items()},
            "residual_scale": self.residual_scale,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EngagementPredictor":
        return cls(
            outcome=data["outcome"],
            intercept=float(data["intercept"]),
            coefficients={Dimension(k): float(v) for k, v in data["coefficients"].items()},
            residual_scale=float(data["residual_scale"]),
            provenance=data.get("provenance", ""),
        )


def fit_engagement_predictor(study: EngagementStudyResult, outcome: str = "log_score",
                             provenance: str = "") -> EngagementPredictor:
    """Extract a linear predictor over the retained dimensions at reference
    levels of the other fixed effects. The interval half-width uses the total
    unexplained scale sqrt(sigma_u^2 + sigma^2) (predictions target new,
    unseen URLs)."""
    result = study.results[outcome]
    residual_scale = math.sqrt(result.random_intercept_variance + result.residual_variance)
    return EngagementPredictor(
        outcome=outcome,
        intercept=result.coefficients["intercept"],
        coefficients={d: result.coefficients[d.value] for d in study.retained_dimensions},
        residual_scale=residual_scale,
        provenance=provenance,
    )


def predict_engagement(predictor: EngagementPredictor, profile: PerceptionProfile) -> dict:
    """Linear prediction with a 95% interval; exact in each retained
    dimension."""
    missing = [d.value for d in predictor.coefficients if d not in profile.scores]
    if missing:
        raise MissingDimensionError(f"profile lacks retained dimensions: {missing}")
    value = predictor.intercept + sum(
        coef * profile.scores[d] for d, coef in predictor.coefficients.items()
    )
    half = 1.96 * predictor.residual_scale
    return {"outcome": predictor.outcome, "prediction": value, "interval": (value - half, value + half)}


# ---------------------------------------------------------------------------
# JSONL codec for posts
# ---------------------------------------------------------------------------

def _post_to_dict(p: SocialPost) -> dict:
    out = dict(p.extra)
    out.update(
        post_id=p.post_id, url=p.url, subreddit=p.subreddit, created_at=p.created_at,
        score=p.score, num_comments=p.num_comments, title_text=p.title_text,
        first_share_of_url_in_subreddit=p.first_share_of_url_in_subreddit,
    )
    return out


def _post_from_dict(data: dict) -> SocialPost:
    data = dict(data)
    url = str(data.pop("url"))
    if not url:
        raise ValueError("url must be non-empty")
    comments = int(data.pop("num_comments", 0))
    if comments < 0:
        raise ValueError(f"num_comments must be >= 0, got {comments}")
    return SocialPost(
        post_id=str(data.pop("post_id")),
        url=url,
        subreddit=str(data.pop("subreddit", "")),
        created_at=float(data.pop("created_at", 0.0)),
        score=int(data.pop("score", 0)),
        num_comments=comments,
        title_text=str(data.pop("title_text", "")),
        first_share_of_url_in_subreddit=bool(data.pop("first_share_of_url_in_subreddit", False)),
        extra=data,
    )


register_jsonl_kind("post", SocialPost, _post_to_dict, _post_from_dict)


# ---------------------------------------------------------------------------
# Synthetic posts for desk-scale runs
# ---------------------------------------------------------------------------

def synthetic_posts(
    n_urls: int = 150,
    posts_per_url: int = 3,
    seed: int = 0,
    planted: dict[Dimension, float] | None = None,
    url_sd: float = 0.8,
    noise_sd: float = 0.5,
    marker_titles: bool = False,
) -> tuple[list[SocialPost], dict[str, PerceptionProfile]]:
    """Posts plus per-post perception profiles with known engagement effects.

    log-score outcomes are generated as intercept + sum(planted * profile) +
    url random intercept + noise, then inverted back to integer scores so the
    forward pipeline (log1p transform) sees consistent data. With
    marker_titles, title texts carry the same dimension-marker tokens the
    synthetic article pool uses, so a trained light scorer can recover the
    profiles from text."""
    from .corpus import marker_tokens

    rng = np.random.default_rng(seed)
    planted = planted or {}
    subreddits = ["r/science", "r/news", "r/technology"]
    domains = ["nature.com", "sciencedaily.com", "arxiv.org"]

    posts: list[SocialPost] = []
    profiles: dict[str, PerceptionProfile] = {}
    counter = 0
    for u in range(n_urls):
        url = f"{domains[u % len(domains)]}/story/{u:04d}"
        url_effect = rng.normal(0.0, url_sd)
        for _ in range(posts_per_url):
            post_id = f"post{counter:06d}"
            counter += 1
            latent = rng.uniform(1.2, 4.8, size=len(DIMENSIONS))
            scores = {d: float(latent[k]) for k, d in enumerate(DIMENSIONS)}
            profile = PerceptionProfile(doc_id=post_id, scores=scores, n_annotators=1)
            log_score = 2.5 + url_effect + rng.normal(0.0, noise_sd)
            for dim, coef in planted.items():
                log_score += coef * scores[dim]
            log_comments = 2.0 + 0.5 * url_effect + rng.normal(0.0, noise_sd)
            for dim, coef in planted.items():
                log_comments += 0.5 * coef * scores[dim]
            if marker_titles:
                words = marker_tokens(latent)
                order = rng.permutation(len(words))
                title = " ".join(words[i] for i in order) or "science update"
            else:
                title = f"synthetic post {post_id}"
            posts.append(
                SocialPost(
                    post_id=post_id,
                    url=url,
                    subreddit=subreddits[int(rng.integers(len(subreddits)))],
                    created_at=float(rng.uniform(0, 1e6)),
                    score=int(np.expm1(max(log_score, 0.0))),
                    num_comments=int(np.expm1(max(log_comments, 0.0))),
                    title_text=title,
                )
            )
            profiles[post_id] = profile
    return posts, profiles
