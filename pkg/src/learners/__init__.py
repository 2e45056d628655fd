"""Base learners ("decision makers") and their registry."""
