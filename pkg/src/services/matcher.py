"""
Compiled dictionary matcher.

Single-word patterns live in a character trie whose nodes hold Exact payloads
(word ends here) and Stem payloads (any word continuing from here). Phrases are
indexed by their first token in a second trie and verified token by token.
"""
import logging

from src.services.lexicon import PatternKind

logger = logging.getLogger(__name__)


class TrieNode:
    __slots__ = ('children', 'exact', 'stem')

    def __init__(self):
        self.children = {}
        self.exact = []
        self.stem = []

    def insert(self, char):
        node = self.children.get(char)
        if node is None:
            node = self.children[char] = TrieNode()
        return node


class PatternTrie:
    """Character trie answering 'which patterns match this word'."""

    def __init__(self):
        self._root = TrieNode()
        self.size = 0

    def insert(self, text, is_stem, payload):
        node = self._root
        for char in text:
            node = node.insert(char)
        (node.stem if is_stem else node.exact).append(payload)
        self.size += 1

    def search(self, word):
        """Payloads of every Exact pattern equal to word and every Stem pattern prefixing it."""
        found = []
        node = self._root
        for char in word:
            node = node.children.get(char)
            if node is None:
                return found
            found.extend(node.stem)
        found.extend(node.exact)
        return found


def _token_matches(token, text, is_stem):
    return token.startswith(text) if is_stem else token == text


class Matcher:
    """Immutable compiled lexicon; safe to share across threads."""

    def __init__(self, lexicon):
        self.lexicon = lexicon
        self._words = PatternTrie()
        self._phrase_heads = PatternTrie()
        self._phrases = []
        for index, entry in enumerate(lexicon.entries):
            pattern = entry.pattern
            if pattern.kind is PatternKind.PHRASE:
                tokens = pattern.phrase_tokens
                phrase_index = len(self._phrases)
                self._phrases.append((index, tokens, entry.category_ids))
                head_text, head_is_stem = tokens[0]
                self._phrase_heads.insert(head_text, head_is_stem, phrase_index)
            else:
                self._words.insert(pattern.text, pattern.kind is PatternKind.STEM, entry.category_ids)
        self.max_phrase_len = max((len(p[1]) for p in self._phrases), default=1)
        logger.debug(
            f"🌳 Compiled matcher: {self._words.size} word patterns, "
            f"{len(self._phrases)} phrases, max phrase length {self.max_phrase_len}"
        )

    def match_token(self, token):
        token = token.lower()
        ids = set()
        for category_ids in self._words.search(token):
            ids.update(category_ids)
        return ids

    def match_phrases(self, tokens):
        window = [t.lower() for t in tokens]
        if len(window) < 2:
            return []
        found = []
        for phrase_index in self._phrase_heads.search(window[0]):
            entry_index, pattern_tokens, category_ids = self._phrases[phrase_index]
            if len(pattern_tokens) > len(window):
                continue
            if all(
                _token_matches(window[pos], text, is_stem)
                for pos, (text, is_stem) in enumerate(pattern_tokens[1:], start=1)
            ):
                found.append((len(pattern_tokens), entry_index, set(category_ids)))
        found.sort(key=lambda item: (-item[0], item[1]))
        return [(length, ids) for length, _, ids in found]


def compile_matcher(lexicon):
    return Matcher(lexicon)


def match_token(matcher, token):
    """Union of category ids of all Exact entries equal to token and Stem entries prefixing it."""
    return matcher.match_token(token)


def match_phrases(matcher, tokens):
    """
    Phrase entries matching the start of a token window.

    Returns:
        list of (phrase length, category ids), longest first, ties in dictionary order
    """
    return matcher.match_phrases(tokens)


__all__ = ['Matcher', 'PatternTrie', 'compile_matcher', 'match_token', 'match_phrases']
