# Tests for heytingkit
