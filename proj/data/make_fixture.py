"""Regenerates data/fixture_headlines.jsonl (LaMP-style headline task, 20 examples)."""
import json
import random
from pathlib import Path

TOPICS = {
    "climate": ["glacier", "emissions", "carbon", "drought", "heatwave", "renewable", "solar", "wind", "coastline", "flooding"],
    "finance": ["markets", "stocks", "inflation", "rates", "bank", "earnings", "investors", "bonds", "currency", "startup"],
    "sports": ["season", "coach", "playoffs", "striker", "marathon", "league", "injury", "transfer", "stadium", "record"],
    "health": ["vaccine", "clinic", "nutrition", "sleep", "hospital", "study", "patients", "therapy", "fitness", "virus"],
    "tech": ["chip", "smartphone", "software", "privacy", "robot", "battery", "cloud", "algorithm", "network", "device"],
    "food": ["recipe", "bakery", "chef", "harvest", "coffee", "restaurant", "spices", "vegan", "market", "kitchen"],
}
FILLER = ["the", "a", "new", "report", "says", "after", "city", "officials", "local", "week", "year", "could", "more", "than", "why", "how"]


def sentence(rng, topic, length):
    words = []
    for _ in range(length):
        words.append(rng.choice(TOPICS[topic]) if rng.random() < 0.55 else rng.choice(FILLER))
    return " ".join(words)


def main():
    rng = random.Random(20240917)
    topics = list(TOPICS)
    sizes = [12, 9, 8, 5, 3, 1, 10, 14, 8, 0, 6, 11, 2, 8, 16, 7, 9, 4, 13, 10]
    lines = []
    for i, size in enumerate(sizes):
        user_topics = rng.sample(topics, 3)
        main_topic = user_topics[0]
        profile = []
        for d in range(size):
            t = user_topics[d % 3] if rng.random() < 0.8 else rng.choice(topics)
            doc = {"id": f"u{i:02d}-d{d:02d}", "text": sentence(rng, t, rng.randint(20, 60)).capitalize() + "."}
            if d % 2 == 0:
                doc["title"] = sentence(rng, t, rng.randint(5, 9)).title()
            profile.append(doc)
        article = sentence(rng, main_topic, rng.randint(25, 45)).capitalize() + "."
        example = {
            "id": f"ex{i:02d}",
            "input": "Generate a headline for the following article: " + article,
            "output": sentence(rng, main_topic, rng.randint(6, 10)).title(),
            "profile": profile,
        }
        lines.append(json.dumps(example, ensure_ascii=False))
    Path(__file__).with_name("fixture_headlines.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
