#!/usr/bin/env python3
"""Regenerates the bundled schema-identical fixture datasets.

The output is deterministic; rerunning this script reproduces the committed files.
"""
import csv
import math
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))

ML_GENRES = [
    "Action", "Adventure", "Animation", "Children", "Comedy", "Crime",
    "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror", "Musical",
    "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western",
]

IMDB_GENRES = [
    "Action", "Adventure", "Animation", "Biography", "Comedy", "Crime",
    "Documentary", "Drama", "Family", "Fantasy", "Film-Noir", "Game-Show",
    "History", "Horror", "Music", "Musical", "Mystery", "News", "Reality-TV",
    "Romance", "Sci-Fi", "Short", "Sport", "Talk-Show", "Thriller", "War",
    "Western",
]

WORDS = ["Night", "River", "Star", "Ghost", "City", "Love", "War", "Road",
         "Dream", "Shadow", "King", "Storm", "Garden", "Machine", "Winter"]


def movielens(num_users=200, num_movies=150, seed=2022):
    rng = random.Random(seed)
    movies = []
    for m in range(1, num_movies + 1):
        if m == num_movies:
            genres = "(no genres listed)"
            gl = []
        else:
            k = rng.choice([1, 1, 2, 2, 2, 3, 3, 4])
            gl = sorted(rng.sample(ML_GENRES, k), key=ML_GENRES.index)
            if rng.random() < 0.08:
                gl.append("IMAX")
            genres = "|".join(gl)
        title = f"{rng.choice(WORDS)} {rng.choice(WORDS)} ({1960 + m % 60})"
        if m % 17 == 0:
            title = f"{rng.choice(WORDS)}, The ({1960 + m % 60})"
        movies.append((m, title, genres, gl))

    # Zipf-like popularity; the genre-less movie is kept unpopular.
    weights = [1.0 / (i + 1) ** 0.8 for i in range(num_movies)]
    weights[-1] = 0.0005
    order = list(range(num_movies))
    rng.shuffle(order[:-1])
    pop = [0.0] * num_movies
    for rank, idx in enumerate(order):
        pop[idx] = weights[rank]

    rows = []
    t0 = 1_100_000_000
    for u in range(1, num_users + 1):
        taste = {g: rng.gauss(0.0, 1.0) for g in ML_GENRES}
        n = rng.randint(20, 90)
        chosen = set()
        while len(chosen) < n:
            chosen.add(rng.choices(range(num_movies), weights=pop)[0])
        for idx in sorted(chosen):
            mid, _, _, gl = movies[idx]
            known = [g for g in gl if g in taste]
            aff = sum(taste[g] for g in known) / max(1, len(known))
            raw = 3.5 + 0.9 * aff + rng.gauss(0.0, 0.6)
            rating = min(5.0, max(0.5, round(raw * 2) / 2))
            rows.append([u, mid, rating, t0 + rng.randint(0, 10_000_000)])
    # Re-rated pairs: the later timestamp must win.
    for u, idx in [(3, 0), (17, 5), (42, 9)]:
        for r in rows:
            if r[0] == u:
                rows.append([u, r[1], 0.5 if r[2] > 2.5 else 5.0, r[3] + 1_000])
                break

    out = os.path.join(HERE, "movielens")
    with open(os.path.join(out, "movies.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["movieId", "title", "genres"])
        for mid, title, genres, _ in movies:
            w.writerow([mid, title, genres])
    with open(os.path.join(out, "ratings.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["userId", "movieId", "rating", "timestamp"])
        for u, m, r, t in rows:
            w.writerow([u, m, f"{r:.1f}", t])


def imdb(num_titles=400, seed=1994):
    rng = random.Random(seed)
    basics = []
    ratings = []
    for i in range(1, num_titles + 1):
        tconst = f"tt{i:07d}"
        ttype = rng.choices(["movie", "short", "tvSeries", "tvEpisode"],
                            weights=[0.75, 0.1, 0.1, 0.05])[0]
        if rng.random() < 0.04:
            genres = "\\N"
        else:
            k = rng.choice([1, 2, 2, 3, 3, 3])
            gl = sorted(rng.sample(IMDB_GENRES, k))
            if rng.random() < 0.03:
                gl = sorted(gl[:2] + ["Adult"])
            genres = ",".join(gl)
        title = f"{rng.choice(WORDS)} of the {rng.choice(WORDS)}"
        year = str(1920 + rng.randint(0, 100))
        runtime = str(rng.randint(60, 180)) if ttype == "movie" else "\\N"
        basics.append([tconst, ttype, title, title, "0", year, "\\N", runtime, genres])
        if rng.random() < 0.85:
            # Untagged titles are obscure, as in the real dump.
            hi = 2.5 if genres == "\\N" else 6.3
            votes = int(10 ** rng.uniform(1.5, hi))
            avg = min(10.0, max(1.0, round(rng.gauss(6.3, 1.2), 1)))
            ratings.append([tconst, f"{avg:.1f}", votes])

    out = os.path.join(HERE, "imdb")
    with open(os.path.join(out, "title.basics.tsv"), "w") as f:
        f.write("tconst\ttitleType\tprimaryTitle\toriginalTitle\tisAdult\tstartYear\tendYear\truntimeMinutes\tgenres\n")
        for row in basics:
            f.write("\t".join(row) + "\n")
    with open(os.path.join(out, "title.ratings.tsv"), "w") as f:
        f.write("tconst\taverageRating\tnumVotes\n")
        for t, a, v in ratings:
            f.write(f"{t}\t{a}\t{v}\n")


def classification(seed=7):
    rng = random.Random(seed)
    centers = {"bird": (0.0, 4.0), "cat": (4.0, 0.0), "dog": (-4.0, 0.0)}
    labels = sorted(centers)
    out = os.path.join(HERE, "classification", "toy.csv")
    with open(out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["example_id", "label", "x0", "x1"])
        for i in range(30):
            lab = labels[i % 3]
            cx, cy = centers[lab]
            w.writerow([f"ex{i:03d}", lab, f"{cx + rng.gauss(0, 0.5):.3f}", f"{cy + rng.gauss(0, 0.5):.3f}"])


if __name__ == "__main__":
    movielens()
    imdb()
    classification()
