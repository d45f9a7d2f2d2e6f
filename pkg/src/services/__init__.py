"""Dictionary, matching, gender inference, extraction, statistics and report rendering."""
